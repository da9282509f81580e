#pragma once

// Run configuration: a flat key=value file. Unknown keys are rejected so a
// typo cannot silently fall back to a default.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qzt/error.hpp"
#include "qzt/flows.hpp"
#include "qzt/policy.hpp"
#include "qzt/textio.hpp"
#include "qzt/vqc.hpp"

namespace qzt {

struct RunConfig {
    std::uint64_t seed = 42;
    std::string out = "out";

    // Input data. An empty train glob selects the synthetic corpus.
    std::string train_glob;
    std::string eval_glob;       // empty: held-out split of the train table
    double eval_fraction = 0.2;  // used only for the split
    double iqr_factor = 1.5;

    // Synthetic corpus (row counts are raw rows, planted outliers included).
    std::size_t synth_train_rows = 3953;
    std::size_t synth_eval_rows = 987;
    std::size_t synth_cols = 13;
    std::size_t synth_files = 20;
    SynthProfile synth_train = [] {
        SynthProfile p;
        p.missing_cells = 47;
        p.outlier_rows = 54;
        return p;
    }();
    SynthProfile synth_eval = [] {
        SynthProfile p;
        p.mid_rate = 0.30;
        p.high_rate = 0.30;
        p.missing_cells = 13;
        p.outlier_rows = 11;
        return p;
    }();

    int n_qubits = 4;
    int layers = 1;
    Encoder encoder = Encoder::Angle;
    TrainingConfig training;

    SimulationConfig sim;
    std::string sim_events;  // JSON-lines stream; empty: synthetic stream
    long long sim_ticks = 40;
    long long sim_attack_start = 10;
    std::vector<SegmentId> sim_attacked = {{1, 2}};

    void validate() const {
        if (out.empty()) throw ConfigError("out directory must not be empty");
        if (!train_glob.empty() || !eval_glob.empty()) {
            if (train_glob.empty()) throw ConfigError("data.eval_glob needs data.train_glob");
        }
        if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) throw ConfigError("data.eval_fraction must lie in (0, 1)");
        if (!(iqr_factor >= 0.0)) throw ConfigError("data.iqr_factor must be nonnegative");
        if (synth_files < 1) throw ConfigError("synth.files must be at least 1");
        if (synth_train_rows < 100 || synth_eval_rows < 100) throw ConfigError("synthetic tables need at least 100 rows");
        if (synth_cols < 2) throw ConfigError("synth.cols must be at least 2");
        synth_train.validate();
        synth_eval.validate();
        QubitState::check_width(n_qubits);
        if (layers < 1) throw ConfigError("model.layers must be at least 1");
        training.validate();
        sim.validate();
        if (sim_ticks < 1) throw ConfigError("sim.ticks must be at least 1");
        for (const auto& s : sim_attacked)
            if (s.r < 0 || s.c < 0 || s.r >= sim.grid_rows || s.c >= sim.grid_cols)
                throw ConfigError("sim.attacked segment " + s.label() + " is outside the grid");
        if (!sim_events.empty() && !std::filesystem::exists(sim_events))
            throw ConfigError("sim.events file not found: " + sim_events);
    }
};

namespace detail {

inline std::string render_segments(const std::vector<SegmentId>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i].r) + ":" + std::to_string(v[i].c);
    return s;
}

inline std::vector<SegmentId> parse_segments(const std::string& s) {
    std::vector<SegmentId> out;
    if (trim(s).empty()) return out;
    for (const auto& item : split(s, ';')) {
        const auto rc = split(trim(item), ':');
        const auto r = rc.size() == 2 ? parse_int(rc[0]) : std::nullopt;
        const auto c = rc.size() == 2 ? parse_int(rc[1]) : std::nullopt;
        if (!r || !c) throw ConfigError("segment list entries look like r:c, got '" + item + "'");
        out.push_back({static_cast<int>(*r), static_cast<int>(*c)});
    }
    return out;
}

// Binds each key to a field for both directions.
struct Field {
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

inline double need_double(const std::string& k, const std::string& v) {
    const auto d = parse_double(v);
    if (!d) throw ConfigError(k + ": expected a number, got '" + v + "'");
    return *d;
}

inline long long need_int(const std::string& k, const std::string& v) {
    const auto d = parse_int(v);
    if (!d) throw ConfigError(k + ": expected an integer, got '" + v + "'");
    return *d;
}

inline std::size_t need_count(const std::string& k, const std::string& v) {
    const auto d = need_int(k, v);
    if (d < 0) throw ConfigError(k + ": must be nonnegative");
    return static_cast<std::size_t>(d);
}

inline bool need_bool(const std::string& k, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(k + ": expected true or false, got '" + v + "'");
}

#define QZT_REAL(key, expr)                                                                            \
    {                                                                                                  \
        key, {[](const RunConfig& c) { return format_double(c.expr); },                                \
              [](RunConfig& c, const std::string& v) { c.expr = need_double(key, v); } }               \
    }
#define QZT_INT(key, expr)                                                                                  \
    {                                                                                                       \
        key, {[](const RunConfig& c) { return std::to_string(c.expr); },                                    \
              [](RunConfig& c, const std::string& v) { c.expr = static_cast<decltype(c.expr)>(need_int(key, v)); } } \
    }
#define QZT_COUNT(key, expr)                                                               \
    {                                                                                      \
        key, {[](const RunConfig& c) { return std::to_string(c.expr); },                   \
              [](RunConfig& c, const std::string& v) { c.expr = need_count(key, v); } }    \
    }
#define QZT_TEXT(key, expr)                                                   \
    {                                                                         \
        key, {[](const RunConfig& c) { return c.expr; },                      \
              [](RunConfig& c, const std::string& v) { c.expr = v; } }        \
    }

inline const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> f = {
        {"seed",
         {[](const RunConfig& c) { return std::to_string(c.seed); },
          [](RunConfig& c, const std::string& v) {
              const auto n = need_int("seed", v);
              if (n < 0) throw ConfigError("seed must be nonnegative");
              c.seed = static_cast<std::uint64_t>(n);
          }}},
        QZT_TEXT("out", out),
        QZT_TEXT("data.train_glob", train_glob),
        QZT_TEXT("data.eval_glob", eval_glob),
        QZT_REAL("data.eval_fraction", eval_fraction),
        QZT_REAL("data.iqr_factor", iqr_factor),
        QZT_COUNT("synth.train_rows", synth_train_rows),
        QZT_COUNT("synth.eval_rows", synth_eval_rows),
        QZT_COUNT("synth.cols", synth_cols),
        QZT_COUNT("synth.files", synth_files),
        QZT_REAL("synth.train.mid_rate", synth_train.mid_rate),
        QZT_REAL("synth.train.high_rate", synth_train.high_rate),
        QZT_COUNT("synth.train.missing_cells", synth_train.missing_cells),
        QZT_COUNT("synth.train.outlier_rows", synth_train.outlier_rows),
        QZT_REAL("synth.eval.mid_rate", synth_eval.mid_rate),
        QZT_REAL("synth.eval.high_rate", synth_eval.high_rate),
        QZT_COUNT("synth.eval.missing_cells", synth_eval.missing_cells),
        QZT_COUNT("synth.eval.outlier_rows", synth_eval.outlier_rows),
        QZT_INT("model.n_qubits", n_qubits),
        QZT_INT("model.layers", layers),
        {"model.encoder",
         {[](const RunConfig& c) { return to_string(c.encoder); },
          [](RunConfig& c, const std::string& v) { c.encoder = parse_encoder(v); }}},
        QZT_REAL("train.learning_rate", training.learning_rate),
        QZT_INT("train.batch_size", training.batch_size),
        QZT_INT("train.epochs", training.epochs),
        {"train.gradient",
         {[](const RunConfig& c) { return to_string(c.training.gradient_mode); },
          [](RunConfig& c, const std::string& v) { c.training.gradient_mode = parse_gradient_mode(v); }}},
        QZT_REAL("policy.gamma1", sim.thresholds.gamma1),
        QZT_REAL("policy.gamma2", sim.thresholds.gamma2),
        QZT_REAL("policy.tau_restrict", sim.thresholds.tau_restrict),
        QZT_REAL("policy.tau_deny", sim.thresholds.tau_deny),
        QZT_INT("policy.delta_t", sim.thresholds.delta_t),
        QZT_INT("policy.hysteresis", sim.thresholds.hysteresis),
        QZT_REAL("policy.gamma_min", sim.thresholds.gamma_min),
        QZT_REAL("policy.gamma_max", sim.thresholds.gamma_max),
        QZT_REAL("policy.fpr_target", sim.thresholds.fpr_target),
        QZT_REAL("policy.kappa", sim.thresholds.kappa),
        QZT_REAL("policy.tau_kappa", sim.thresholds.tau_kappa),
        QZT_REAL("policy.weight_score", sim.weights.score),
        QZT_REAL("policy.weight_user", sim.weights.user),
        QZT_REAL("policy.weight_device", sim.weights.device),
        QZT_REAL("policy.shrink", sim.shrink),
        {"policy.adapt_gamma",
         {[](const RunConfig& c) { return std::string(c.sim.adapt_gamma ? "true" : "false"); },
          [](RunConfig& c, const std::string& v) { c.sim.adapt_gamma = need_bool("policy.adapt_gamma", v); }}},
        QZT_INT("sim.grid_rows", sim.grid_rows),
        QZT_INT("sim.grid_cols", sim.grid_cols),
        QZT_COUNT("sim.risk_window", sim.risk_window),
        QZT_COUNT("sim.feedback_window", sim.feedback_window),
        QZT_TEXT("sim.events", sim_events),
        QZT_INT("sim.ticks", sim_ticks),
        QZT_INT("sim.attack_start", sim_attack_start),
        {"sim.attacked",
         {[](const RunConfig& c) { return render_segments(c.sim_attacked); },
          [](RunConfig& c, const std::string& v) { c.sim_attacked = parse_segments(v); }}},
    };
    return f;
}

#undef QZT_REAL
#undef QZT_INT
#undef QZT_COUNT
#undef QZT_TEXT

}  // namespace detail

inline constexpr const char* kConfigSchema = "# schema: qzt-config v1";

inline std::string render_config(const RunConfig& c) {
    KeyValues kv;
    for (const auto& [k, f] : detail::fields()) kv.set(k, f.get(c));
    return kv.render(kConfigSchema);
}

// Keys not present keep their defaults.
inline RunConfig parse_config(std::string_view text, const std::string& source) {
    const auto kv = KeyValues::parse(text, source);
    RunConfig c;
    for (const auto& [k, v] : kv.entries) {
        const auto& fs = detail::fields();
        auto it = std::find_if(fs.begin(), fs.end(), [&](const auto& p) { return p.first == k; });
        if (it == fs.end()) throw ConfigError(source + ": unknown key '" + k + "'");
        try {
            it->second.set(c, v);
        } catch (const ConfigError& e) {
            throw ConfigError(source + ": " + e.what());
        }
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) throw ConfigError("config file not found: " + path);
    std::string text;
    try {
        text = read_file(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text, path);
}

// Independent, reproducible seed per pipeline stage.
inline std::uint64_t stage_seed(std::uint64_t master, std::uint64_t stage) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stage + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace qzt
