#pragma once

// Variational quantum classifier.
//
// Ansatz, per layer: RY(theta) then RZ(theta) on every qubit, then a ring
// of CNOTs i -> (i+1) mod n applied in increasing i (skipped for n = 1).
// Parameters are stored layer by layer, qubit by qubit, as (ry, rz) pairs.
//
// The anomaly score is (1 - <Z_readout>) / 2 and the training loss is the
// mean squared error against the class targets 0, 0.5 and 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qzt/encoding.hpp"
#include "qzt/error.hpp"
#include "qzt/qsim.hpp"
#include "qzt/random.hpp"
#include "qzt/textio.hpp"

namespace qzt {

enum class Encoder { Angle, Amplitude, Basis };

inline std::string to_string(Encoder e) {
    switch (e) {
        case Encoder::Angle: return "angle";
        case Encoder::Amplitude: return "amplitude";
        case Encoder::Basis: return "basis";
    }
    return "?";
}

inline Encoder parse_encoder(std::string_view s) {
    if (s == "angle") return Encoder::Angle;
    if (s == "amplitude") return Encoder::Amplitude;
    if (s == "basis") return Encoder::Basis;
    throw ConfigError("unknown encoder '" + std::string(s) + "'");
}

enum class GradientMode { ParameterShift, FiniteDifference };

inline std::string to_string(GradientMode m) {
    return m == GradientMode::ParameterShift ? "parameter-shift" : "finite-difference";
}

inline GradientMode parse_gradient_mode(std::string_view s) {
    if (s == "parameter-shift") return GradientMode::ParameterShift;
    if (s == "finite-difference") return GradientMode::FiniteDifference;
    throw ConfigError("unknown gradient mode '" + std::string(s) + "'");
}

struct VariationalModel {
    int n_qubits = 1;
    int layers = 1;
    std::vector<double> theta;
    int readout = 0;
    Encoder encoder = Encoder::Angle;
    // Input width. For the angle encoder it may exceed n_qubits, in which case
    // features are mean-pooled over contiguous chunks, one chunk per qubit.
    int n_features = 1;

    std::size_t n_params() const { return static_cast<std::size_t>(2 * n_qubits * layers); }
    Observable readout_observable() const { return Observable::pauli_z(readout); }

    void validate() const {
        QubitState::check_width(n_qubits);
        if (layers < 1) throw ConfigError("model needs at least one layer");
        if (theta.size() != n_params())
            throw DimensionError("theta has " + std::to_string(theta.size()) + " entries, layout needs " +
                                 std::to_string(n_params()));
        for (double t : theta)
            if (!std::isfinite(t)) throw NumericError("theta has a non-finite entry");
        if (readout < 0 || readout >= n_qubits) throw ConfigError("readout qubit out of range");
        switch (encoder) {
            case Encoder::Angle:
                if (n_features < n_qubits)
                    throw ConfigError("angle encoder needs at least one feature per qubit");
                break;
            case Encoder::Amplitude:
                if (std::max(1, ceil_log2(static_cast<std::uint64_t>(std::max(1, n_features)))) != n_qubits)
                    throw ConfigError("amplitude encoder of " + std::to_string(n_features) +
                                      " features does not fit " + std::to_string(n_qubits) + " qubits");
                break;
            case Encoder::Basis:
                if (n_features != n_qubits) throw ConfigError("basis encoder needs one bit per qubit");
                break;
        }
    }

    friend bool operator==(const VariationalModel&, const VariationalModel&) = default;
};

inline VariationalModel build_ansatz(int n_qubits, int layers, std::uint64_t seed, Encoder encoder = Encoder::Angle,
                                     int n_features = 0) {
    QubitState::check_width(n_qubits);
    if (layers < 1) throw ConfigError("ansatz needs at least one layer");
    VariationalModel m;
    m.n_qubits = n_qubits;
    m.layers = layers;
    m.encoder = encoder;
    m.n_features = n_features > 0 ? n_features
                   : encoder == Encoder::Amplitude ? (1 << n_qubits)
                                                   : n_qubits;
    Rng rng(seed);
    m.theta.resize(m.n_params());
    for (auto& t : m.theta) t = rng.uniform(-0.1, 0.1);
    m.validate();
    return m;
}

inline std::vector<GateSpec> ansatz_gates(const VariationalModel& m, std::span<const double> theta) {
    std::vector<GateSpec> g;
    g.reserve(static_cast<std::size_t>(m.layers * m.n_qubits * 3));
    std::size_t k = 0;
    for (int l = 0; l < m.layers; ++l) {
        for (int q = 0; q < m.n_qubits; ++q) {
            g.push_back(GateSpec::ry(q, theta[k++]));
            g.push_back(GateSpec::rz(q, theta[k++]));
        }
        if (m.n_qubits > 1)
            for (int q = 0; q < m.n_qubits; ++q) g.push_back(GateSpec::cnot(q, (q + 1) % m.n_qubits));
    }
    return g;
}

// Contiguous chunk means, the first (n mod k) chunks one element longer.
inline std::vector<double> pool_features(std::span<const double> x, int groups) {
    const std::size_t n = x.size();
    const auto k = static_cast<std::size_t>(groups);
    if (groups < 1 || n < k) throw DimensionError("cannot pool " + std::to_string(n) + " features into " +
                                                  std::to_string(groups) + " groups");
    std::vector<double> out(k);
    std::size_t pos = 0;
    for (std::size_t g = 0; g < k; ++g) {
        const std::size_t len = n / k + (g < n % k ? 1 : 0);
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) s += x[pos + i];
        out[g] = s / static_cast<double>(len);
        pos += len;
    }
    return out;
}

inline QubitState encode_input(const VariationalModel& m, std::span<const double> x) {
    if (static_cast<int>(x.size()) != m.n_features)
        throw DimensionError("model expects " + std::to_string(m.n_features) + " features, got " +
                             std::to_string(x.size()));
    switch (m.encoder) {
        case Encoder::Angle:
            if (m.n_features == m.n_qubits) return angle_encode(x);
            return angle_encode(pool_features(x, m.n_qubits));
        case Encoder::Amplitude: return amplitude_encode(x);
        case Encoder::Basis: return basis_encode(x);
    }
    throw ConfigError("unknown encoder");
}

namespace detail {

inline double readout_z(const VariationalModel& m, const QubitState& encoded, std::span<const double> theta) {
    std::vector<Complex> amps(encoded.amplitudes().begin(), encoded.amplitudes().end());
    for (const auto& g : ansatz_gates(m, theta)) apply_gate_inplace(amps, m.n_qubits, g);
    const std::size_t b = bit_of(m.n_qubits, m.readout);
    double z = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) z += (i & b) ? -std::norm(amps[i]) : std::norm(amps[i]);
    return z;
}

inline double score_from_z(double z) { return (1.0 - z) / 2.0; }

}  // namespace detail

inline double anomaly_score(const VariationalModel& m, std::span<const double> x) {
    m.validate();
    return std::clamp(detail::score_from_z(detail::readout_z(m, encode_input(m, x), m.theta)), 0.0, 1.0);
}

// Score <= gamma1 -> 1, gamma1 < score <= gamma2 -> 2, above gamma2 -> 3.
inline int classify(double score, double gamma1, double gamma2) {
    if (!(gamma1 < gamma2)) throw ConfigError("classify needs gamma1 < gamma2");
    if (score <= gamma1) return 1;
    if (score <= gamma2) return 2;
    return 3;
}

inline double class_target(int cls) {
    switch (cls) {
        case 1: return 0.0;
        case 2: return 0.5;
        case 3: return 1.0;
        default: throw DataError("class must be 1, 2 or 3, got " + std::to_string(cls));
    }
}

struct LabeledSample {
    std::vector<double> x;
    int cls = 1;  // 1, 2 or 3
};

inline double cost(const VariationalModel& m, std::span<const LabeledSample> batch) {
    if (batch.empty()) throw DataError("cost of an empty batch");
    m.validate();
    double s = 0.0;
    for (const auto& item : batch) {
        const double d = anomaly_score(m, item.x) - class_target(item.cls);
        s += d * d;
    }
    return s / static_cast<double>(batch.size());
}

namespace detail {

inline double cost_at(const VariationalModel& m, std::span<const QubitState> encoded, std::span<const double> targets,
                      std::span<const double> theta) {
    double s = 0.0;
    for (std::size_t i = 0; i < encoded.size(); ++i) {
        const double d = score_from_z(readout_z(m, encoded[i], theta)) - targets[i];
        s += d * d;
    }
    return s / static_cast<double>(encoded.size());
}

}  // namespace detail

inline constexpr double kFiniteDifferenceStep = 1e-6;

inline std::vector<double> gradient(const VariationalModel& m, std::span<const LabeledSample> batch,
                                    GradientMode mode = GradientMode::ParameterShift) {
    if (batch.empty()) throw DataError("gradient of an empty batch");
    m.validate();
    std::vector<QubitState> encoded;
    std::vector<double> targets;
    encoded.reserve(batch.size());
    for (const auto& item : batch) {
        encoded.push_back(encode_input(m, item.x));
        targets.push_back(class_target(item.cls));
    }
    const std::size_t P = m.n_params();
    std::vector<double> grad(P, 0.0);
    std::vector<double> th = m.theta;

    if (mode == GradientMode::FiniteDifference) {
        for (std::size_t k = 0; k < P; ++k) {
            th[k] = m.theta[k] + kFiniteDifferenceStep;
            const double cp = detail::cost_at(m, encoded, targets, th);
            th[k] = m.theta[k] - kFiniteDifferenceStep;
            const double cm = detail::cost_at(m, encoded, targets, th);
            th[k] = m.theta[k];
            grad[k] = (cp - cm) / (2.0 * kFiniteDifferenceStep);
        }
        return grad;
    }

    // Parameter shift: d<Z>/dtheta = (<Z>(theta + pi/2) - <Z>(theta - pi/2)) / 2,
    // chained through score = (1 - <Z>)/2 and the squared loss.
    const double shift = std::numbers::pi / 2.0;
    for (std::size_t i = 0; i < encoded.size(); ++i) {
        const double score = detail::score_from_z(detail::readout_z(m, encoded[i], m.theta));
        const double outer = 2.0 * (score - targets[i]);
        for (std::size_t k = 0; k < P; ++k) {
            th[k] = m.theta[k] + shift;
            const double zp = detail::readout_z(m, encoded[i], th);
            th[k] = m.theta[k] - shift;
            const double zm = detail::readout_z(m, encoded[i], th);
            th[k] = m.theta[k];
            grad[k] += outer * (-(zp - zm) / 4.0);
        }
    }
    for (auto& g : grad) g /= static_cast<double>(encoded.size());
    return grad;
}

struct TrainingConfig {
    double learning_rate = 0.001;
    int batch_size = 128;
    int epochs = 12;
    std::uint64_t seed = 0;
    GradientMode gradient_mode = GradientMode::ParameterShift;
    // Thresholds used only for the accuracy columns of the history.
    double gamma1 = 0.25;
    double gamma2 = 0.75;

    void validate() const {
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
            throw ConfigError("learning rate must be finite and nonnegative");
        if (batch_size < 1) throw ConfigError("batch size must be at least 1");
        if (epochs < 1) throw ConfigError("epochs must be at least 1");
        if (!(gamma1 < gamma2)) throw ConfigError("history thresholds need gamma1 < gamma2");
    }
};

struct EpochRecord {
    int epoch = 0;
    double mean_cost = 0.0;
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;  // NaN when no validation set was given
    double wall_seconds = 0.0;
};

struct TrainingHistory {
    std::vector<EpochRecord> epochs;
};

struct TrainResult {
    VariationalModel model;
    TrainingHistory history;
};

inline double accuracy_at(const VariationalModel& m, std::span<const LabeledSample> data, double g1, double g2) {
    if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::size_t hit = 0;
    for (const auto& s : data) hit += classify(anomaly_score(m, s.x), g1, g2) == s.cls ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(data.size());
}

// Mini-batch gradient descent. Each epoch visits the data in a fresh
// seeded permutation; the recorded cost is the full-data cost after the
// epoch, summed in index order.
inline TrainResult train(VariationalModel model, std::span<const LabeledSample> data, const TrainingConfig& cfg,
                         std::span<const LabeledSample> validation = {}) {
    if (data.empty()) throw DataError("training set is empty");
    cfg.validate();
    model.validate();
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const auto bs = static_cast<std::size_t>(cfg.batch_size);

    TrainResult out;
    std::vector<LabeledSample> batch;
    batch.reserve(bs);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += bs) {
            batch.clear();
            for (std::size_t i = start; i < std::min(order.size(), start + bs); ++i) batch.push_back(data[order[i]]);
            const auto g = gradient(model, batch, cfg.gradient_mode);
            for (std::size_t k = 0; k < g.size(); ++k) {
                if (!std::isfinite(g[k]))
                    throw NumericError("non-finite gradient at epoch " + std::to_string(epoch) + ", batch starting " +
                                       std::to_string(start) + ", parameter " + std::to_string(k));
                model.theta[k] -= cfg.learning_rate * g[k];
            }
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.mean_cost = cost(model, data);
        if (!std::isfinite(rec.mean_cost))
            throw NumericError("cost is not finite after epoch " + std::to_string(epoch));
        rec.train_accuracy = accuracy_at(model, data, cfg.gamma1, cfg.gamma2);
        rec.validation_accuracy = accuracy_at(model, validation, cfg.gamma1, cfg.gamma2);
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.history.epochs.push_back(rec);
    }
    out.model = std::move(model);
    return out;
}

// Continues descent from the current parameters on a feedback set.
inline VariationalModel retrain(const VariationalModel& model, std::span<const LabeledSample> feedback,
                                const TrainingConfig& cfg) {
    if (feedback.empty()) throw DataError("retraining needs a nonempty feedback set");
    return train(model, feedback, cfg).model;
}

// Class-1 samples scored above gamma2.
inline std::vector<LabeledSample> collect_false_positives(const VariationalModel& m, std::span<const LabeledSample> data,
                                                          double gamma2) {
    std::vector<LabeledSample> fp;
    for (const auto& s : data)
        if (s.cls == 1 && anomaly_score(m, s.x) > gamma2) fp.push_back(s);
    return fp;
}

// Checkpoint: schema line, then key=value lines. theta is a
// space-separated list of shortest round-trip decimals, so the file
// reproduces the parameters bit for bit. Extra keys (such as calibrated
// thresholds) ride along in `extras`.
inline constexpr const char* kModelSchema = "# schema: qzt-model v1";

inline std::string serialize_model(const VariationalModel& m, const std::map<std::string, double>& extras = {}) {
    KeyValues kv;
    kv.set("n_qubits", m.n_qubits);
    kv.set("layers", m.layers);
    kv.set("encoder", to_string(m.encoder));
    kv.set("readout", m.readout);
    kv.set("n_features", m.n_features);
    std::string th;
    for (std::size_t i = 0; i < m.theta.size(); ++i) th += (i ? " " : "") + format_double(m.theta[i]);
    kv.set("theta", th);
    for (const auto& [k, v] : extras) kv.set(k, v);
    return kv.render(kModelSchema);
}

struct Checkpoint {
    VariationalModel model;
    std::map<std::string, double> extras;
};

inline Checkpoint parse_model(std::string_view text, const std::string& source = "checkpoint") {
    const auto nl = text.find('\n');
    if (trim(text.substr(0, nl)) != kModelSchema) throw DataError(source + ": missing or unsupported schema line");
    const auto kv = KeyValues::parse(text, source);
    auto need = [&](const char* k) -> const std::string& {
        const auto* v = kv.find(k);
        if (!v) throw DataError(source + ": missing key " + k);
        return *v;
    };
    auto need_int = [&](const char* k) {
        const auto v = parse_int(need(k));
        if (!v) throw DataError(source + ": key " + k + " is not an integer");
        return static_cast<int>(*v);
    };
    Checkpoint c;
    c.model.n_qubits = need_int("n_qubits");
    c.model.layers = need_int("layers");
    c.model.readout = need_int("readout");
    c.model.n_features = need_int("n_features");
    try {
        c.model.encoder = parse_encoder(need("encoder"));
    } catch (const ConfigError& e) {
        throw DataError(source + ": " + e.what());
    }
    for (const auto& tok : split(need("theta"), ' ')) {
        if (tok.empty()) continue;
        const auto v = parse_double(tok);
        if (!v) throw DataError(source + ": bad theta entry '" + tok + "'");
        c.model.theta.push_back(*v);
    }
    static const char* known[] = {"n_qubits", "layers", "readout", "n_features", "encoder", "theta"};
    for (const auto& [k, v] : kv.entries) {
        bool is_known = false;
        for (const char* kn : known) is_known = is_known || k == kn;
        if (is_known) continue;
        const auto d = parse_double(v);
        if (!d) throw DataError(source + ": key " + k + " is not a number");
        c.extras[k] = *d;
    }
    try {
        c.model.validate();
    } catch (const NumericError& e) {
        throw NumericError(source + ": " + e.what());
    } catch (const Error& e) {
        throw DataError(source + ": " + e.what());
    }
    return c;
}

}  // namespace qzt
