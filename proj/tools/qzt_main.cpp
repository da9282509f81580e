#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qzt/pipeline.hpp"

namespace {

struct Common {
    std::string config;
    long long seed = -1;
    std::string out;
};

qzt::RunConfig resolve(const Common& c) {
    qzt::RunConfig cfg = c.config.empty() ? qzt::RunConfig{} : qzt::load_config(c.config);
    if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
    if (!c.out.empty()) cfg.out = c.out;
    return cfg;
}

void print_counts(const char* what, const std::vector<std::size_t>& c) {
    std::printf("%s labels: %zu / %zu / %zu\n", what, c[0], c[1], c[2]);
}

int run(const std::string& verb, const Common& common) {
    const auto cfg = resolve(common);
    if (verb == "ingest") {
        const auto r = qzt::cmd_ingest(cfg);
        std::printf("train cleaning: missing_imputed=%zu outliers_removed=%zu rows_remaining=%zu\n",
                    r.train_report.missing_imputed, r.train_report.outliers_removed, r.train_report.rows_remaining);
        if (r.eval_report)
            std::printf("eval cleaning: missing_imputed=%zu outliers_removed=%zu rows_remaining=%zu\n",
                        r.eval_report->missing_imputed, r.eval_report->outliers_removed, r.eval_report->rows_remaining);
        print_counts("train", r.train_counts);
        print_counts("eval", r.eval_counts);
    } else if (verb == "train") {
        const auto r = qzt::cmd_train(cfg);
        for (const auto& e : r.history.epochs) std::printf("epoch %2d  cost %.6f\n", e.epoch, e.mean_cost);
        std::printf("gamma1=%.6g gamma2=%.6g train_accuracy=%.4f eval_accuracy=%.4f\n", r.calibrated.gamma1,
                    r.calibrated.gamma2, r.calibrated.accuracy, r.eval_accuracy);
    } else if (verb == "evaluate") {
        const auto r = qzt::cmd_evaluate(cfg);
        std::printf("auc=%.6f auc_class3=%.6f gamma_star=%.6g accuracy=%.4f\n", r.auc, r.auc_class3, r.gamma_star,
                    r.accuracy);
    } else if (verb == "simulate") {
        const auto r = qzt::cmd_simulate(cfg);
        std::size_t isolated = 0;
        for (const auto& [id, p] : r.after) isolated += p == qzt::Policy::Isolated;
        std::printf("events=%zu granted=%zu restricted=%zu denied=%zu isolated_segments=%zu\n", r.log.size() - 1,
                    r.verdicts[0], r.verdicts[1], r.verdicts[2], isolated);
    } else if (verb == "report") {
        const auto r = qzt::cmd_report(cfg);
        std::fputs(r.text.c_str(), stdout);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-inspired zero-trust anomaly detection pipeline"};
    app.require_subcommand(1);
    Common common;
    for (const char* verb : {"ingest", "train", "evaluate", "simulate", "report"}) {
        auto* sub = app.add_subcommand(verb);
        sub->add_option("--config", common.config, "key=value configuration file");
        sub->add_option("--seed", common.seed, "master seed (overrides the config)")->check(CLI::NonNegativeNumber);
        sub->add_option("--out", common.out, "output directory (overrides the config)");
    }
    app.get_subcommand("ingest")->description("load, clean, label and split flow records");
    app.get_subcommand("train")->description("train the variational classifier");
    app.get_subcommand("evaluate")->description("ROC, AUC, thresholds, confusion on the eval set");
    app.get_subcommand("simulate")->description("replay a flow stream through the policy engine");
    app.get_subcommand("report")->description("summarize every stage's artifacts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    const std::string verb = app.get_subcommands().front()->get_name();
    try {
        return run(verb, common);
    } catch (const qzt::Error& e) {
        std::cerr << "qzt " << verb << ": " << e.what() << "\n";
        return qzt::exit_code_for(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "qzt " << verb << ": " << e.what() << "\n";
        return 3;
    }
}
