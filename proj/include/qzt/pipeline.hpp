#pragma once

// The five pipeline stages behind the command-line verbs. Each reads its
// inputs from, and writes its artifacts under, the configured out
// directory:
//
//   raw/       synthetic corpus as CSV (ingest, synthetic mode only)
//   dataset/   train.csv, eval.csv, fit.txt, cleaning reports
//   model/     checkpoint.txt, history.csv, summary.txt
//   eval/      metrics.txt, roc.csv, roc_class3.csv, confusion.csv, sensitivity.csv
//   sim/       events.jsonl, log.jsonl, segments_before.csv, segments_after.csv, summary.txt
//   report/    report.txt
//
// Every stage validates its configuration and checks its inputs before
// writing anything.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "qzt/config.hpp"
#include "qzt/flows.hpp"
#include "qzt/metrics.hpp"
#include "qzt/policy.hpp"
#include "qzt/vqc.hpp"

namespace qzt {

namespace fs = std::filesystem;

enum Stage : std::uint64_t { kSeedSynthTrain = 1, kSeedSynthEval, kSeedSplit, kSeedModel, kSeedTrain, kSeedStream };

struct Paths {
    fs::path root;
    fs::path raw() const { return root / "raw"; }
    fs::path dataset() const { return root / "dataset"; }
    fs::path model() const { return root / "model"; }
    fs::path eval() const { return root / "eval"; }
    fs::path sim() const { return root / "sim"; }
    fs::path report() const { return root / "report"; }
    fs::path train_csv() const { return dataset() / "train.csv"; }
    fs::path eval_csv() const { return dataset() / "eval.csv"; }
    fs::path checkpoint() const { return model() / "checkpoint.txt"; }
};

namespace detail {

inline void put(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    write_file(p.string(), content);
}

inline void require(const fs::path& p, const std::string& stage) {
    if (!fs::is_regular_file(p)) throw DataError("missing artifact " + p.string() + " (run '" + stage + "' first)");
}

inline std::vector<LabeledSample> samples_of(const LabeledDataset& ds) {
    std::vector<LabeledSample> out;
    out.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) out.push_back({ds.features[i], ds.labels[i] + 1});
    return out;
}

inline std::vector<double> scores_of(const VariationalModel& m, const std::vector<LabeledSample>& s) {
    std::vector<double> out;
    out.reserve(s.size());
    for (const auto& x : s) out.push_back(anomaly_score(m, x.x));
    return out;
}

inline std::vector<int> classes_of(const std::vector<LabeledSample>& s) {
    std::vector<int> out;
    for (const auto& x : s) out.push_back(x.cls);
    return out;
}

inline LabeledDataset load_dataset(const fs::path& p) {
    require(p, "ingest");
    return parse_dataset_csv(p.string());
}

// Calibrated thresholds from the checkpoint, if they fit the policy bounds;
// the configured ones otherwise.
inline Thresholds thresholds_for(const RunConfig& cfg, const Checkpoint& ck) {
    Thresholds t = cfg.sim.thresholds;
    const auto g1 = ck.extras.find("gamma1"), g2 = ck.extras.find("gamma2");
    if (g1 == ck.extras.end() || g2 == ck.extras.end()) return t;
    Thresholds c = t;
    c.gamma1 = std::clamp(g1->second, t.gamma_min, t.gamma_max);
    c.gamma2 = std::clamp(g2->second, t.gamma_min, t.gamma_max);
    if (c.gamma1 < c.gamma2) return c;
    return t;
}

inline Checkpoint load_checkpoint(const Paths& p) {
    require(p.checkpoint(), "train");
    return parse_model(read_file(p.checkpoint().string()), p.checkpoint().string());
}

}  // namespace detail

// ------------------------------------------------------------------ ingest

struct IngestResult {
    CleaningReport train_report;
    std::optional<CleaningReport> eval_report;
    std::vector<std::size_t> train_counts;
    std::vector<std::size_t> eval_counts;
    std::size_t eval_clamped = 0;
};

inline IngestResult cmd_ingest(const RunConfig& cfg) {
    cfg.validate();
    const Paths p{cfg.out};
    IngestResult res;

    std::string train_glob = cfg.train_glob, eval_glob = cfg.eval_glob;
    std::vector<std::pair<fs::path, std::string>> raw_files;
    if (train_glob.empty()) {
        const auto tr = synth_generate(cfg.synth_train_rows, cfg.synth_cols, stage_seed(cfg.seed, kSeedSynthTrain),
                                       cfg.synth_train);
        const auto ev = synth_generate(cfg.synth_eval_rows, cfg.synth_cols, stage_seed(cfg.seed, kSeedSynthEval),
                                       cfg.synth_eval);
        const std::size_t nf = cfg.synth_files;
        for (std::size_t f = 0; f < nf; ++f) {
            char name[32];
            std::snprintf(name, sizeof name, "train_%02zu.csv", f);
            raw_files.push_back({p.raw() / name, render_table_csv(tr, f * tr.n_rows() / nf, (f + 1) * tr.n_rows() / nf)});
        }
        raw_files.push_back({p.raw() / "eval.csv", render_table_csv(ev, 0, ev.n_rows())});
        for (const auto& [path, text] : raw_files) detail::put(path, text);
        train_glob = (p.raw() / "train_*.csv").string();
        eval_glob = (p.raw() / "eval.csv").string();
    }

    const auto raw_train = load_flows(train_glob);
    auto [clean_train, train_rep] = clean(raw_train, cfg.iqr_factor);
    res.train_report = train_rep;

    LabeledDataset train, eval;
    if (eval_glob.empty()) {
        std::tie(train, eval) = split(label(clean_train), cfg.eval_fraction, stage_seed(cfg.seed, kSeedSplit));
    } else {
        const auto raw_eval = load_flows(eval_glob);
        if (raw_eval.columns != raw_train.columns) throw DataError(eval_glob + ": columns differ from the training files");
        auto [clean_eval, eval_rep] = clean(raw_eval, cfg.iqr_factor);
        res.eval_report = eval_rep;
        train = label(clean_train);
        eval = apply_fit(train.fit, clean_eval.rows);
    }
    res.train_counts = train.label_counts();
    res.eval_counts = eval.label_counts();
    res.eval_clamped = eval.clamped_cells;

    detail::put(p.train_csv(), render_dataset_csv(train));
    detail::put(p.eval_csv(), render_dataset_csv(eval));
    detail::put(p.dataset() / "fit.txt", render_fit(train.fit));
    detail::put(p.dataset() / "cleaning_train.txt", render_report(res.train_report));
    if (res.eval_report) detail::put(p.dataset() / "cleaning_eval.txt", render_report(*res.eval_report));
    KeyValues kv;
    kv.set("train_rows", train.size());
    kv.set("eval_rows", eval.size());
    for (int c = 0; c < 3; ++c) {
        kv.set("train_label" + std::to_string(c), res.train_counts[static_cast<std::size_t>(c)]);
        kv.set("eval_label" + std::to_string(c), res.eval_counts[static_cast<std::size_t>(c)]);
    }
    kv.set("eval_clamped_cells", res.eval_clamped);
    detail::put(p.dataset() / "summary.txt", kv.render("# schema: qzt-dataset-summary v1"));
    return res;
}

// ------------------------------------------------------------------- train

struct TrainOutcome {
    VariationalModel model;
    TrainingHistory history;
    ClassThresholds calibrated;
    double eval_accuracy = 0.0;
};

inline constexpr const char* kHistorySchema = "# schema: qzt-history v1";

inline std::string render_history(const TrainingHistory& h) {
    std::string out = std::string(kHistorySchema) + "\nepoch,mean_cost,train_accuracy,validation_accuracy\n";
    for (const auto& e : h.epochs)
        out += std::to_string(e.epoch) + "," + format_double(e.mean_cost) + "," + format_double(e.train_accuracy) + "," +
               (std::isnan(e.validation_accuracy) ? std::string() : format_double(e.validation_accuracy)) + "\n";
    return out;
}

inline TrainOutcome cmd_train(const RunConfig& cfg) {
    cfg.validate();
    const Paths p{cfg.out};
    const auto train_ds = detail::load_dataset(p.train_csv());
    const auto eval_ds = detail::load_dataset(p.eval_csv());
    if (eval_ds.columns != train_ds.columns) throw DataError("train and eval datasets have different columns");
    const auto tr = detail::samples_of(train_ds);
    const auto ev = detail::samples_of(eval_ds);

    auto model = build_ansatz(cfg.n_qubits, cfg.layers, stage_seed(cfg.seed, kSeedModel), cfg.encoder,
                              static_cast<int>(train_ds.columns.size()));
    TrainingConfig tc = cfg.training;
    tc.seed = stage_seed(cfg.seed, kSeedTrain);
    tc.gamma1 = cfg.sim.thresholds.gamma1;
    tc.gamma2 = cfg.sim.thresholds.gamma2;

    TrainOutcome out;
    auto result = train(model, tr, tc, ev);
    out.model = result.model;
    out.history = result.history;
    out.calibrated = calibrate_class_thresholds(detail::scores_of(out.model, tr), detail::classes_of(tr));
    out.eval_accuracy = accuracy_at(out.model, ev, out.calibrated.gamma1, out.calibrated.gamma2);

    detail::put(p.checkpoint(), serialize_model(out.model, {{"gamma1", out.calibrated.gamma1},
                                                            {"gamma2", out.calibrated.gamma2}}));
    detail::put(p.model() / "history.csv", render_history(out.history));
    KeyValues kv;
    kv.set("epochs", static_cast<int>(out.history.epochs.size()));
    kv.set("final_cost", out.history.epochs.back().mean_cost);
    kv.set("gamma1", out.calibrated.gamma1);
    kv.set("gamma2", out.calibrated.gamma2);
    kv.set("train_accuracy", out.calibrated.accuracy);
    kv.set("eval_accuracy", out.eval_accuracy);
    detail::put(p.model() / "summary.txt", kv.render("# schema: qzt-train-summary v1"));
    return out;
}

// ---------------------------------------------------------------- evaluate

struct EvalOutcome {
    double auc = 0.0;
    double auc_class3 = 0.0;
    double gamma_star = 0.0;
    double accuracy = 0.0;
    Confusion confusion;
    RocCurve curve;
};

inline constexpr const char* kSensitivitySchema = "# schema: qzt-sensitivity v1";

inline EvalOutcome evaluate_scores(std::span<const double> scores, std::span<const int> classes, const Thresholds& t) {
    EvalOutcome out;
    std::vector<int> pred;
    for (double s : scores) pred.push_back(classify(s, t.gamma1, t.gamma2));
    out.confusion = confusion(pred, classes);
    out.accuracy = out.confusion.accuracy();
    out.curve = roc(scores, binarize(classes, 2));
    out.auc = auc(out.curve);
    out.gamma_star = optimal_gamma(out.curve);
    const auto y3 = binarize(classes, 3);
    if (std::count(y3.begin(), y3.end(), 1) > 0 && std::count(y3.begin(), y3.end(), 0) > 0)
        out.auc_class3 = auc(roc(scores, y3));
    else
        out.auc_class3 = std::numeric_limits<double>::quiet_NaN();
    return out;
}

inline EvalOutcome cmd_evaluate(const RunConfig& cfg) {
    cfg.validate();
    const Paths p{cfg.out};
    const auto ck = detail::load_checkpoint(p);
    const auto eval_ds = detail::load_dataset(p.eval_csv());
    if (static_cast<int>(eval_ds.columns.size()) != ck.model.n_features)
        throw DataError("eval dataset width does not match the checkpoint");
    const auto ev = detail::samples_of(eval_ds);
    const auto scores = detail::scores_of(ck.model, ev);
    const auto classes = detail::classes_of(ev);
    const Thresholds t = detail::thresholds_for(cfg, ck);
    auto out = evaluate_scores(scores, classes, t);

    std::string sens = std::string(kSensitivitySchema) + "\ngamma,sensitivity\n";
    for (int k = 1; k <= 19; ++k) {
        const double g = k * 0.05;
        sens += format_double(g) + "," + format_double(sensitivity(out.curve, g, 0.01)) + "\n";
    }
    KeyValues kv;
    kv.set("n", ev.size());
    kv.set("auc", out.auc);
    kv.set("auc_class3", std::isnan(out.auc_class3) ? std::string("nan") : format_double(out.auc_class3));
    kv.set("gamma_star", out.gamma_star);
    kv.set("gamma1", t.gamma1);
    kv.set("gamma2", t.gamma2);
    kv.set("accuracy", out.accuracy);
    if (out.gamma_star >= 0.01 && out.gamma_star <= 0.99)
        kv.set("sensitivity_at_gamma_star", sensitivity(out.curve, out.gamma_star, 0.01));
    detail::put(p.eval() / "metrics.txt", kv.render("# schema: qzt-metrics v1"));
    detail::put(p.eval() / "roc.csv", render_roc_points(out.curve));
    if (!std::isnan(out.auc_class3)) detail::put(p.eval() / "roc_class3.csv", render_roc_points(roc(scores, binarize(classes, 3))));
    detail::put(p.eval() / "confusion.csv", render_confusion(out.confusion));
    detail::put(p.eval() / "sensitivity.csv", sens);
    return out;
}

// ---------------------------------------------------------------- simulate

inline SimulationResult cmd_simulate(const RunConfig& cfg) {
    cfg.validate();
    const Paths p{cfg.out};
    const auto ck = detail::load_checkpoint(p);
    std::vector<FlowEvent> events;
    if (!cfg.sim_events.empty()) {
        events = parse_events(read_file(cfg.sim_events), cfg.sim_events);
    } else {
        const auto eval_ds = detail::load_dataset(p.eval_csv());
        std::vector<std::vector<double>> benign, attack;
        for (std::size_t i = 0; i < eval_ds.size(); ++i) {
            if (eval_ds.labels[i] == 0) benign.push_back(eval_ds.features[i]);
            if (eval_ds.labels[i] == 2) attack.push_back(eval_ds.features[i]);
        }
        StreamSpec spec;
        spec.grid_rows = cfg.sim.grid_rows;
        spec.grid_cols = cfg.sim.grid_cols;
        spec.ticks = cfg.sim_ticks;
        spec.attacked = cfg.sim_attacked;
        spec.attack_start = cfg.sim_attack_start;
        events = synth_stream(spec, benign, attack, stage_seed(cfg.seed, kSeedStream));
    }
    SimulationConfig sc = cfg.sim;
    sc.thresholds = detail::thresholds_for(cfg, ck);
    auto res = run_simulation(events, ck.model, sc);

    detail::put(p.sim() / "events.jsonl", render_events(events));
    detail::put(p.sim() / "log.jsonl", render_log(res));
    detail::put(p.sim() / "segments_before.csv", render_snapshot(res.before));
    detail::put(p.sim() / "segments_after.csv", render_snapshot(res.after));
    KeyValues kv;
    kv.set("events", events.size());
    kv.set("granted", res.verdicts[0]);
    kv.set("restricted", res.verdicts[1]);
    kv.set("denied", res.verdicts[2]);
    std::string isolated;
    for (const auto& [id, pol] : res.after)
        if (pol == Policy::Isolated) isolated += (isolated.empty() ? "" : " ") + id.label();
    kv.set("isolated_segments", isolated);
    kv.set("feedback_rounds", res.fpr_rounds.size());
    kv.set("final_gamma1", res.global.gamma1);
    kv.set("final_gamma2", res.global.gamma2);
    detail::put(p.sim() / "summary.txt", kv.render("# schema: qzt-sim-summary v1"));
    return res;
}

// ------------------------------------------------------------------ report

struct ReportOutcome {
    std::string text;
    std::vector<std::string> missing_stages;
};

inline ReportOutcome cmd_report(const RunConfig& cfg) {
    cfg.validate();
    const Paths p{cfg.out};
    struct StageFiles {
        const char* stage;
        std::vector<fs::path> files;
        fs::path summary;
    };
    const std::vector<StageFiles> stages = {
        {"ingest",
         {p.train_csv(), p.eval_csv(), p.dataset() / "fit.txt", p.dataset() / "cleaning_train.txt"},
         p.dataset() / "summary.txt"},
        {"train", {p.checkpoint(), p.model() / "history.csv"}, p.model() / "summary.txt"},
        {"evaluate",
         {p.eval() / "roc.csv", p.eval() / "confusion.csv", p.eval() / "sensitivity.csv"},
         p.eval() / "metrics.txt"},
        {"simulate",
         {p.sim() / "events.jsonl", p.sim() / "log.jsonl", p.sim() / "segments_before.csv", p.sim() / "segments_after.csv"},
         p.sim() / "summary.txt"},
    };

    ReportOutcome out;
    std::string body;
    bool any = false;
    for (const auto& s : stages) {
        body += "\n[" + std::string(s.stage) + "]\n";
        std::vector<fs::path> all = s.files;
        all.push_back(s.summary);
        if (s.stage == std::string("ingest") && fs::exists(p.dataset() / "cleaning_eval.txt"))
            all.push_back(p.dataset() / "cleaning_eval.txt");
        bool complete = true;
        for (const auto& f : all) {
            const bool ok = fs::is_regular_file(f);
            complete = complete && ok;
            body += (ok ? "  artifact " : "  MISSING  ") + fs::relative(f, p.root).generic_string() + "\n";
        }
        if (!complete) {
            out.missing_stages.push_back(s.stage);
            continue;
        }
        any = true;
        const auto kv = KeyValues::parse(read_file(s.summary.string()), s.summary.string());
        for (const auto& [k, v] : kv.entries) body += "  " + k + " = " + v + "\n";
        if (s.stage == std::string("ingest")) {
            for (const char* name : {"cleaning_train.txt", "cleaning_eval.txt"}) {
                const auto f = p.dataset() / name;
                if (!fs::exists(f)) continue;
                const auto r = parse_report(read_file(f.string()), f.string());
                body += "  " + std::string(name) + ": missing_imputed=" + std::to_string(r.missing_imputed) +
                        " outliers_removed=" + std::to_string(r.outliers_removed) +
                        " rows_remaining=" + std::to_string(r.rows_remaining) + "\n";
            }
        }
    }
    if (!any) throw DataError("nothing to report under " + p.root.string() + ": no stage has completed");
    std::string head = "# schema: qzt-report v1\nrun report for " + p.root.generic_string() + "\nseed = " +
                       std::to_string(cfg.seed) + "\n";
    head += "missing stages = ";
    for (std::size_t i = 0; i < out.missing_stages.size(); ++i) head += (i ? " " : "") + out.missing_stages[i];
    head += out.missing_stages.empty() ? "none\n" : "\n";
    out.text = head + body;
    detail::put(p.report() / "report.txt", out.text);
    return out;
}

}  // namespace qzt
