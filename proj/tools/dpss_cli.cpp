// Experiment runner for the private subspace estimators.
//
// Subcommands: exact | approx | boost  (seeded Monte-Carlo trials, CSV out),
//              audit                    (sensitivity audits, JSONL out),
//              calibrate                (constant sweep),
//              selftest                 (sampler statistical self-tests).
//
// Exit codes: 0 completed, 2 config error, 3 acceptance threshold unmet
// (only with --assert).

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "dpss/harness.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    bool assert_thresholds = false;
    std::optional<double> threshold;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file (ExperimentConfig fields)");
    cmd->add_option("--trials", flags.trials, "number of trials");
    cmd->add_option("--seed", flags.seed, "base seed");
    cmd->add_option("--out", flags.out, "output path");
    cmd->add_option("--threads", flags.threads, "worker threads");
    cmd->add_flag("--assert", flags.assert_thresholds, "exit 3 if the success threshold is unmet");
    cmd->add_option("--threshold", flags.threshold, "success-rate threshold used by --assert");
}

dpss::ExperimentConfig load_config(const CommonFlags& flags, dpss::Algorithm algorithm) {
    dpss::ExperimentConfig cfg;
    cfg.algorithm = algorithm;
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) throw dpss::ConfigError("cannot open config file " + flags.config_path);
        dpss::json j = dpss::json::parse(in);
        if (!j.contains("algorithm")) j["algorithm"] = dpss::to_string(algorithm);
        cfg = j.get<dpss::ExperimentConfig>();
    }
    if (flags.trials) cfg.trials = *flags.trials;
    if (flags.seed) cfg.base_seed = *flags.seed;
    if (flags.out) cfg.out_path = *flags.out;
    if (flags.threads) cfg.threads = *flags.threads;
    cfg.algorithm = algorithm;
    cfg.validate();
    return cfg;
}

double default_threshold(dpss::Algorithm a) {
    switch (a) {
        case dpss::Algorithm::Exact: return 1.0;
        case dpss::Algorithm::Approx: return 0.65;
        case dpss::Algorithm::Boosted: return 0.9;
    }
    return 1.0;
}

int run_estimator(const CommonFlags& flags, dpss::Algorithm algorithm) {
    const dpss::ExperimentConfig cfg = load_config(flags, algorithm);
    const dpss::RunSummary summary = dpss::run_trials(cfg);
    if (!cfg.out_path.empty()) dpss::write_trials_csv(cfg.out_path, summary);

    std::cout << "algorithm=" << dpss::to_string(algorithm) << " trials=" << summary.trials
              << " successes=" << summary.successes << " success_rate=" << summary.success_rate;
    if (summary.trials == 0) std::cout << " (no trials: success_rate is NaN)";
    std::cout << "\n";

    const double threshold = flags.threshold.value_or(default_threshold(algorithm));
    if (flags.assert_thresholds && !(summary.success_rate >= threshold)) {
        std::cerr << "threshold unmet: " << summary.success_rate << " < " << threshold << "\n";
        return 3;
    }
    return 0;
}

int run_audit(const CommonFlags& flags, const std::string& algorithm_name) {
    const dpss::ExperimentConfig cfg = load_config(flags, dpss::algorithm_from_string(algorithm_name));
    const dpss::AuditReport rep = dpss::sensitivity_audit(cfg);
    const dpss::json line = dpss::audit_report_json(rep, cfg.algorithm);
    std::cout << line.dump() << "\n";
    if (!cfg.out_path.empty()) {
        std::ofstream out(cfg.out_path, std::ios::app);
        out << line.dump() << "\n";
    }
    if (flags.assert_thresholds && !rep.pass) return 3;
    return 0;
}

int run_calibrate(const CommonFlags& flags) {
    dpss::ExperimentConfig cfg = load_config(flags, dpss::Algorithm::Approx);
    std::vector<dpss::ConstantTuple> grid;
    for (double c0 : {6.0, 8.0}) {
        for (double c1 : {2.0, 3.0}) {
            for (double c2 : {20.0, 60.0, 120.0}) {
                grid.push_back(dpss::ConstantTuple{c0, c1, c2, 18.0});
            }
        }
    }
    const double threshold = flags.threshold.value_or(0.65);
    const dpss::CalibrationResult result = dpss::calibrate_constants(cfg, grid, threshold);
    std::cout << "c0,c1,c2,c3,success_rate,feasible\n";
    for (const dpss::CalibrationRow& row : result.table) {
        std::cout << row.constants.c0 << ',' << row.constants.c1 << ',' << row.constants.c2 << ','
                  << row.constants.c3 << ',' << row.success_rate << ',' << (row.feasible ? 1 : 0)
                  << "\n";
    }
    std::cout << "best: c0=" << result.best.c0 << " c1=" << result.best.c1
              << " c2=" << result.best.c2 << " c3=" << result.best.c3 << "\n";
    return 0;
}

int run_selftest(const CommonFlags& flags) {
    dpss::Rng rng = dpss::make_rng(flags.seed.value_or(1));
    const int trials = flags.trials.value_or(20000);
    const dpss::SelfTestReport rep = dpss::sampler_self_test(2, 3.0, trials, rng);
    std::cout << "chi2_threshold=" << rep.chi2_threshold << " empirical=" << rep.chi2_empirical
              << " bound=" << rep.chi2_tail_bound << "\n"
              << "band_pass_fraction=" << rep.band_pass_fraction << " worst_C=" << rep.band_worst_c
              << "\n"
              << (rep.pass ? "PASS" : "FAIL") << "\n";
    return rep.pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"differentially private subspace recovery harness"};
    app.require_subcommand(1);

    CommonFlags exact_flags, approx_flags, boost_flags, audit_flags, calibrate_flags, selftest_flags;
    std::string audit_algorithm = "exact";

    add_common(app.add_subcommand("exact", "run DPESE trials"), exact_flags);
    add_common(app.add_subcommand("approx", "run DPASE trials"), approx_flags);
    add_common(app.add_subcommand("boost", "run DPASEB trials"), boost_flags);
    CLI::App* audit = app.add_subcommand("audit", "sensitivity audits over neighboring datasets");
    add_common(audit, audit_flags);
    audit->add_option("--algorithm", audit_algorithm, "exact | approx");
    add_common(app.add_subcommand("calibrate", "sweep the universal constants"), calibrate_flags);
    add_common(app.add_subcommand("selftest", "sampler statistical self-tests"), selftest_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("exact")) return run_estimator(exact_flags, dpss::Algorithm::Exact);
        if (app.got_subcommand("approx")) return run_estimator(approx_flags, dpss::Algorithm::Approx);
        if (app.got_subcommand("boost")) return run_estimator(boost_flags, dpss::Algorithm::Boosted);
        if (app.got_subcommand("audit")) return run_audit(audit_flags, audit_algorithm);
        if (app.got_subcommand("calibrate")) return run_calibrate(calibrate_flags);
        if (app.got_subcommand("selftest")) return run_selftest(selftest_flags);
    } catch (const dpss::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const dpss::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
