#pragma once

// Zero-trust decision engine: risk scores, access decisions, per-segment
// policy state machine, threshold adaptation and an event-driven simulator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qzt/error.hpp"
#include "qzt/random.hpp"
#include "qzt/vqc.hpp"

namespace qzt {

struct Thresholds {
    double gamma1 = 0.25;
    double gamma2 = 0.75;
    double tau_restrict = 0.65;
    double tau_deny = 0.8;
    int delta_t = 2;
    double gamma_min = 0.01;
    double gamma_max = 0.99;
    double fpr_target = 0.05;
    double kappa = 0.5;
    int hysteresis = 5;
    // Proportional tau rule mirroring the gamma feedback; 0 leaves tau fixed.
    double tau_kappa = 0.0;

    void validate() const {
        if (!(0.0 <= gamma1 && gamma1 < gamma2 && gamma2 <= 1.0)) throw ConfigError("need 0 <= gamma1 < gamma2 <= 1");
        if (!(0.0 <= tau_restrict && tau_restrict < tau_deny && tau_deny <= 1.0))
            throw ConfigError("need 0 <= tau_restrict < tau_deny <= 1");
        if (delta_t < 0) throw ConfigError("grace period must be nonnegative");
        if (hysteresis < 1) throw ConfigError("hysteresis must be at least 1");
        if (!(0.0 < gamma_min && gamma_min <= gamma1 && gamma2 <= gamma_max && gamma_max <= 1.0))
            throw ConfigError("gamma bounds must satisfy 0 < min <= gamma1 < gamma2 <= max <= 1");
        if (!(fpr_target >= 0.0 && fpr_target <= 1.0)) throw ConfigError("FPR target must lie in [0, 1]");
        if (!(kappa >= 0.0) || !(tau_kappa >= 0.0)) throw ConfigError("feedback gains must be nonnegative");
    }

    friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

struct UserDeviceContext {
    std::vector<double> user;
    std::vector<double> device;

    void validate() const {
        for (const auto* v : {&user, &device})
            for (double x : *v)
                if (!(x >= 0.0 && x <= 1.0)) throw DataError("context features must lie in [0, 1]");
    }
};

struct RiskWeights {
    double score = 0.6;
    double user = 0.2;
    double device = 0.2;
};

namespace detail {
inline double mean_or_zero(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}
}  // namespace detail

inline double risk_score(const UserDeviceContext& ctx, double score, const RiskWeights& w = {}) {
    if (!(w.score >= 0 && w.user >= 0 && w.device >= 0) || std::abs(w.score + w.user + w.device - 1.0) > 1e-12)
        throw ConfigError("risk weights must be nonnegative and sum to 1");
    if (!(score >= 0.0 && score <= 1.0)) throw DataError("anomaly score must lie in [0, 1]");
    ctx.validate();
    const double r = w.score * score + w.user * detail::mean_or_zero(ctx.user) + w.device * detail::mean_or_zero(ctx.device);
    return std::clamp(r, 0.0, 1.0);
}

enum class Verdict { Granted, Restricted, Denied };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Granted: return "granted";
        case Verdict::Restricted: return "restricted";
        case Verdict::Denied: return "denied";
    }
    return "?";
}

struct AccessDecision {
    Verdict verdict = Verdict::Granted;
    double risk = 0.0;
    long long tick = 0;
};

inline AccessDecision access_decide(double risk, const Thresholds& t, long long tick = 0) {
    t.validate();
    if (!(risk >= 0.0 && risk <= 1.0)) throw DataError("risk must lie in [0, 1]");
    Verdict v = risk >= t.tau_deny ? Verdict::Denied : risk >= t.tau_restrict ? Verdict::Restricted : Verdict::Granted;
    return {v, risk, tick};
}

inline double segment_risk(std::span<const double> risks) {
    if (risks.empty()) throw DataError("segment risk needs at least one score");
    double s = 0.0;
    for (double r : risks) {
        if (!(r >= 0.0 && r <= 1.0)) throw DataError("risk scores must lie in [0, 1]");
        s += r;
    }
    return s / static_cast<double>(risks.size());
}

// Scales both gammas by the same factor when the segment risk exceeds
// tau_deny. The factor is raised just enough to keep gamma1 at its lower
// bound, so gamma1 < gamma2 survives the clamp.
inline Thresholds adapt_gamma_for_risk(const Thresholds& t, double segment_r, double shrink = 0.8) {
    if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("shrink must lie in (0, 1)");
    t.validate();
    if (!(segment_r > t.tau_deny)) return t;
    double f = shrink;
    if (t.gamma1 * f < t.gamma_min) f = t.gamma_min / t.gamma1;
    Thresholds out = t;
    out.gamma1 = std::max(t.gamma_min, t.gamma1 * f);
    out.gamma2 = t.gamma2 * f;
    return out;
}

// gamma2 moves by kappa * (FPR - target); gamma1 keeps its ratio to gamma2.
// gamma2 is held high enough that the rescaled gamma1 stays in bounds.
inline Thresholds threshold_feedback(const Thresholds& t, double fpr_observed) {
    if (!(fpr_observed >= 0.0 && fpr_observed <= 1.0)) throw DataError("observed FPR must lie in [0, 1]");
    t.validate();
    const double ratio = t.gamma1 / t.gamma2;
    const double lo = std::max(t.gamma_min, t.gamma_min / ratio);
    Thresholds out = t;
    out.gamma2 = std::clamp(t.gamma2 + t.kappa * (fpr_observed - t.fpr_target), lo, t.gamma_max);
    out.gamma1 = std::max(t.gamma_min, ratio * out.gamma2);
    if (t.tau_kappa > 0.0) {
        const double width = t.tau_deny - t.tau_restrict;
        const double d = std::clamp(t.tau_deny + t.tau_kappa * (fpr_observed - t.fpr_target), width, 1.0);
        out.tau_restrict = d - width;
        out.tau_deny = d;
    }
    return out;
}

enum class Policy { Open, Restricted, Isolated };

inline std::string to_string(Policy p) {
    switch (p) {
        case Policy::Open: return "open";
        case Policy::Restricted: return "restricted";
        case Policy::Isolated: return "isolated";
    }
    return "?";
}

struct SegmentId {
    int r = 0;
    int c = 0;

    auto operator<=>(const SegmentId&) const = default;
    std::string label() const { return "(" + std::to_string(r) + "," + std::to_string(c) + ")"; }
};

struct SegmentState {
    SegmentId id;
    Policy policy = Policy::Open;
    int flag_ticks = 0;   // consecutive Class 3
    int clean_ticks = 0;  // consecutive Class 1
    double risk = 0.0;    // aggregated over the recent window
    long long last_tick = -1;

    friend bool operator==(const SegmentState&, const SegmentState&) = default;
};

inline SegmentState policy_step(SegmentState s, int flow_class, const Thresholds& t, long long tick) {
    s.last_tick = tick;
    switch (flow_class) {
        case 3:
            ++s.flag_ticks;
            s.clean_ticks = 0;
            if (s.flag_ticks > t.delta_t) s.policy = Policy::Isolated;
            break;
        case 2:
            s.flag_ticks = 0;
            s.clean_ticks = 0;
            if (s.policy == Policy::Open) s.policy = Policy::Restricted;
            break;
        case 1:
            s.flag_ticks = 0;
            ++s.clean_ticks;
            if (s.clean_ticks >= t.hysteresis && s.policy != Policy::Open) {
                s.policy = s.policy == Policy::Isolated ? Policy::Restricted : Policy::Open;
                s.clean_ticks = 0;
            }
            break;
        default: throw DataError("flow class must be 1, 2 or 3");
    }
    return s;
}

// ------------------------------------------------------------ simulation

struct FlowEvent {
    long long tick = 0;
    SegmentId segment;
    UserDeviceContext context;
    std::vector<double> features;
    std::optional<int> label;  // true class 1, 2 or 3
};

struct SimulationConfig {
    Thresholds thresholds;
    RiskWeights weights;
    int grid_rows = 4;
    int grid_cols = 4;
    std::size_t risk_window = 10;     // recent risks averaged per segment
    std::size_t feedback_window = 0;  // labeled events per feedback round; 0 disables
    double shrink = 0.8;
    bool adapt_gamma = true;

    void validate() const {
        thresholds.validate();
        if (grid_rows < 1 || grid_cols < 1) throw ConfigError("segment grid must be at least 1x1");
        if (risk_window < 1) throw ConfigError("risk window must be at least 1");
        if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("shrink must lie in (0, 1)");
    }
};

using Snapshot = std::vector<std::pair<SegmentId, Policy>>;

struct SimulationResult {
    std::vector<std::string> log;  // JSON lines, schema record first
    Snapshot before;
    Snapshot after;
    std::map<SegmentId, SegmentState> segments;
    std::map<SegmentId, Thresholds> segment_thresholds;
    Thresholds global;
    std::size_t verdicts[3] = {0, 0, 0};
    std::vector<double> fpr_rounds;
};

inline constexpr const char* kSimLogSchema = "qzt-simlog v1";
inline constexpr const char* kSnapshotSchema = "# schema: qzt-segments v1";

using Scorer = std::function<double(std::span<const double>)>;

inline SimulationResult run_simulation(std::span<const FlowEvent> events, const Scorer& scorer,
                                       const SimulationConfig& cfg) {
    cfg.validate();
    SimulationResult res;
    res.global = cfg.thresholds;
    for (int r = 0; r < cfg.grid_rows; ++r)
        for (int c = 0; c < cfg.grid_cols; ++c) {
            SegmentState s;
            s.id = {r, c};
            res.segments[s.id] = s;
            res.before.push_back({s.id, s.policy});
        }
    std::map<SegmentId, std::deque<double>> recent;

    nlohmann::ordered_json head;
    head["schema"] = kSimLogSchema;
    res.log.push_back(head.dump());

    long long prev_tick = std::numeric_limits<long long>::min();
    std::size_t fb_benign = 0, fb_false = 0, fb_seen = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        const std::string where = "event " + std::to_string(i);
        if (e.tick < prev_tick) throw DataError(where + ": ticks must be nondecreasing");
        prev_tick = e.tick;
        auto it = res.segments.find(e.segment);
        if (it == res.segments.end()) throw DataError(where + ": segment " + e.segment.label() + " is outside the grid");
        if (e.label && (*e.label < 1 || *e.label > 3)) throw DataError(where + ": label must be 1, 2 or 3");
        e.context.validate();

        const auto ov = res.segment_thresholds.find(e.segment);
        const Thresholds& th = ov != res.segment_thresholds.end() ? ov->second : res.global;

        const double raw = scorer(e.features);
        if (!std::isfinite(raw)) throw NumericError(where + ": non-finite anomaly score");
        const double score = std::clamp(raw, 0.0, 1.0);
        const int cls = classify(score, th.gamma1, th.gamma2);
        const double risk = risk_score(e.context, score, cfg.weights);
        const auto decision = access_decide(risk, th, e.tick);
        ++res.verdicts[static_cast<int>(decision.verdict)];

        auto& q = recent[e.segment];
        q.push_back(risk);
        if (q.size() > cfg.risk_window) q.pop_front();
        const std::vector<double> window(q.begin(), q.end());
        SegmentState next = policy_step(it->second, cls, th, e.tick);
        next.risk = segment_risk(window);
        it->second = next;
        if (cfg.adapt_gamma && next.risk > th.tau_deny)
            res.segment_thresholds[e.segment] = adapt_gamma_for_risk(th, next.risk, cfg.shrink);

        nlohmann::ordered_json rec;
        rec["tick"] = e.tick;
        rec["segment"] = e.segment.label();
        rec["score"] = score;
        rec["class"] = cls;
        rec["risk"] = risk;
        rec["verdict"] = to_string(decision.verdict);
        rec["policy"] = to_string(next.policy);
        res.log.push_back(rec.dump());

        if (cfg.feedback_window > 0 && e.label) {
            ++fb_seen;
            if (*e.label == 1) {
                ++fb_benign;
                if (cls == 3) ++fb_false;
            }
            if (fb_seen == cfg.feedback_window) {
                if (fb_benign > 0) {
                    const double fpr = static_cast<double>(fb_false) / static_cast<double>(fb_benign);
                    res.fpr_rounds.push_back(fpr);
                    res.global = threshold_feedback(res.global, fpr);
                    nlohmann::ordered_json fb;
                    fb["tick"] = e.tick;
                    fb["feedback_fpr"] = fpr;
                    fb["gamma1"] = res.global.gamma1;
                    fb["gamma2"] = res.global.gamma2;
                    res.log.push_back(fb.dump());
                }
                fb_seen = fb_benign = fb_false = 0;
            }
        }
    }
    for (const auto& [id, s] : res.segments) res.after.push_back({id, s.policy});
    return res;
}

inline SimulationResult run_simulation(std::span<const FlowEvent> events, const VariationalModel& model,
                                       const SimulationConfig& cfg) {
    model.validate();
    return run_simulation(
        events,
        [&](std::span<const double> x) {
            if (x.size() != static_cast<std::size_t>(model.n_features))
                throw DataError("event has " + std::to_string(x.size()) + " features, model expects " +
                                std::to_string(model.n_features));
            return anomaly_score(model, x);
        },
        cfg);
}

inline std::string render_log(const SimulationResult& r) {
    std::string out;
    for (const auto& line : r.log) out += line + "\n";
    return out;
}

inline std::string render_snapshot(const Snapshot& s) {
    std::string out = std::string(kSnapshotSchema) + "\nr,c,policy\n";
    for (const auto& [id, p] : s) out += std::to_string(id.r) + "," + std::to_string(id.c) + "," + to_string(p) + "\n";
    return out;
}

inline FlowEvent parse_event(std::string_view line, const std::string& where) {
    FlowEvent e;
    try {
        const auto j = nlohmann::json::parse(line);
        e.tick = j.at("tick").get<long long>();
        const auto& seg = j.at("segment");
        e.segment = {seg.at(0).get<int>(), seg.at(1).get<int>()};
        e.features = j.at("features").get<std::vector<double>>();
        if (j.contains("user")) e.context.user = j.at("user").get<std::vector<double>>();
        if (j.contains("device")) e.context.device = j.at("device").get<std::vector<double>>();
        if (j.contains("label") && !j.at("label").is_null()) e.label = j.at("label").get<int>();
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(where + ": malformed event (" + ex.what() + ")");
    }
    return e;
}

// One JSON object per line; a leading {"schema": ...} record is skipped.
inline std::vector<FlowEvent> parse_events(std::string_view text, const std::string& source) {
    std::vector<FlowEvent> out;
    int lineno = 0;
    for (const auto& raw : split(text, '\n')) {
        ++lineno;
        const auto line = trim(raw);
        if (line.empty()) continue;
        if (line.find("\"schema\"") != std::string_view::npos && line.find("\"tick\"") == std::string_view::npos) continue;
        out.push_back(parse_event(line, source + ":" + std::to_string(lineno)));
    }
    return out;
}

inline constexpr const char* kEventSchema = "qzt-events v1";

inline std::string render_events(std::span<const FlowEvent> events) {
    nlohmann::ordered_json head;
    head["schema"] = kEventSchema;
    std::string out = head.dump() + "\n";
    for (const auto& e : events) {
        nlohmann::ordered_json j;
        j["tick"] = e.tick;
        j["segment"] = {e.segment.r, e.segment.c};
        j["features"] = e.features;
        j["user"] = e.context.user;
        j["device"] = e.context.device;
        if (e.label) j["label"] = *e.label;
        out += j.dump() + "\n";
    }
    return out;
}

// Synthetic stream: one event per segment per tick. Benign segments draw
// features from benign_pool and low-risk contexts; attacked segments switch
// to attack_pool and high-risk contexts from attack_start on.
struct StreamSpec {
    int grid_rows = 4;
    int grid_cols = 4;
    long long ticks = 40;
    std::vector<SegmentId> attacked;
    long long attack_start = 10;
    int context_width = 3;
};

inline std::vector<FlowEvent> synth_stream(const StreamSpec& spec, std::span<const std::vector<double>> benign_pool,
                                           std::span<const std::vector<double>> attack_pool, std::uint64_t seed) {
    if (benign_pool.empty()) throw DataError("benign feature pool is empty");
    if (!spec.attacked.empty() && attack_pool.empty()) throw DataError("attack feature pool is empty");
    if (spec.ticks < 1 || spec.grid_rows < 1 || spec.grid_cols < 1 || spec.context_width < 1)
        throw ConfigError("stream needs positive ticks, grid size and context width");
    Rng rng(seed);
    std::vector<FlowEvent> out;
    for (long long t = 0; t < spec.ticks; ++t)
        for (int r = 0; r < spec.grid_rows; ++r)
            for (int c = 0; c < spec.grid_cols; ++c) {
                const SegmentId id{r, c};
                const bool attack =
                    t >= spec.attack_start && std::find(spec.attacked.begin(), spec.attacked.end(), id) != spec.attacked.end();
                FlowEvent e;
                e.tick = t;
                e.segment = id;
                const auto& pool = attack ? attack_pool : benign_pool;
                e.features = pool[rng.below(pool.size())];
                for (int k = 0; k < spec.context_width; ++k) {
                    e.context.user.push_back(attack ? rng.uniform(0.6, 1.0) : rng.uniform(0.0, 0.4));
                    e.context.device.push_back(attack ? rng.uniform(0.6, 1.0) : rng.uniform(0.0, 0.4));
                }
                e.label = attack ? 3 : 1;
                out.push_back(std::move(e));
            }
    return out;
}

}  // namespace qzt
