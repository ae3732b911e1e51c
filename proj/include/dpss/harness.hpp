#pragma once

// Experiment harness: seeded trial execution for the three estimators,
// sensitivity audits, constant calibration, and CSV/JSONL reporting.
// The estimators only ever see the data matrix; the truth subspace stays
// on the harness side of the interface.

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <tuple>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpss/approx.hpp"
#include "dpss/exact.hpp"
#include "dpss/synth.hpp"

namespace dpss {

using json = nlohmann::json;

enum class Algorithm { Exact, Approx, Boosted };

inline std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Exact: return "exact";
        case Algorithm::Approx: return "approx";
        case Algorithm::Boosted: return "boosted";
    }
    return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
    if (s == "exact") return Algorithm::Exact;
    if (s == "approx") return Algorithm::Approx;
    if (s == "boosted" || s == "boost") return Algorithm::Boosted;
    throw ConfigError("unknown algorithm: " + s);
}

enum class Outcome { Success, Wrong, NullOrBot };

inline std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::Success: return "SUCCESS";
        case Outcome::Wrong: return "WRONG";
        case Outcome::NullOrBot: return "NULL_OR_BOT";
    }
    return "?";
}

struct ExperimentConfig {
    Algorithm algorithm = Algorithm::Exact;
    int d = 6;
    int k = 2;
    int n = 45;
    int ell = 1;          // exact case
    double gamma = 1e-4;  // approx case
    double eps = 1.0;
    double delta = 0.01;
    double alpha = 0.1;
    double beta = 0.1;  // boosted case
    double c0 = 8.0, c1 = 2.0, c2 = 120.0, c3 = 18.0;
    int trials = 100;
    std::uint64_t base_seed = 1;
    std::string out_path;
    int threads = 1;
    int audit_pairs = 300;

    void validate() const {
        if (d < 1 || k < 1 || k > d) throw ConfigError("config: need 1 <= k <= d");
        if (n < 1) throw ConfigError("config: n must be positive");
        if (trials < 0) throw ConfigError("config: trials must be nonnegative");
        if (threads < 1) throw ConfigError("config: threads must be positive");
        if (!(eps > 0.0) || !(delta > 0.0) || !(delta < 1.0)) throw ConfigError("config: bad privacy budget");
        if (!(alpha > 0.0) || !(alpha < 1.0)) throw ConfigError("config: alpha must lie in (0,1)");
        if (algorithm == Algorithm::Exact) {
            if (ell < k - 1) throw ConfigError("config: ell must be at least k-1");
            if (d <= k) throw ConfigError("config: exact case needs d > k");
        } else {
            if (!(gamma > 0.0) || !(gamma < 1.0)) throw ConfigError("config: gamma must lie in (0,1)");
            if (!(beta > 0.0) || !(beta < 1.0)) throw ConfigError("config: beta must lie in (0,1)");
        }
        if (!(c0 > 0.0) || !(c1 > 0.0) || !(c2 > 0.0) || !(c3 > 0.0)) throw ConfigError("config: constants must be positive");
    }

    PrivacyParams privacy() const { return PrivacyParams{eps, delta}; }

    ApproxConfig approx_config() const {
        ApproxConfig cfg;
        cfg.pp = privacy();
        cfg.alpha = alpha;
        cfg.gamma = gamma;
        cfg.k = k;
        cfg.c0 = c0;
        cfg.c1 = c1;
        cfg.c2 = c2;
        cfg.c3 = c3;
        return cfg;
    }

    ExactConfig exact_config() const {
        ExactConfig cfg;
        cfg.k = k;
        cfg.ell = ell;
        cfg.pp = privacy();
        return cfg;
    }
};

inline void from_json(const json& j, ExperimentConfig& cfg) {
    if (j.contains("algorithm")) cfg.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    auto get = [&](const char* name, auto& field) {
        if (j.contains(name)) field = j.at(name).get<std::decay_t<decltype(field)>>();
    };
    get("d", cfg.d);
    get("k", cfg.k);
    get("n", cfg.n);
    get("ell", cfg.ell);
    get("gamma", cfg.gamma);
    get("eps", cfg.eps);
    get("delta", cfg.delta);
    get("alpha", cfg.alpha);
    get("beta", cfg.beta);
    get("c0", cfg.c0);
    get("c1", cfg.c1);
    get("c2", cfg.c2);
    get("c3", cfg.c3);
    get("trials", cfg.trials);
    get("seed", cfg.base_seed);
    get("out", cfg.out_path);
    get("threads", cfg.threads);
    get("audit_pairs", cfg.audit_pairs);
    for (auto it = j.begin(); it != j.end(); ++it) {
        static const char* known[] = {"algorithm", "d", "k", "n", "ell", "gamma", "eps", "delta",
                                      "alpha", "beta", "c0", "c1", "c2", "c3", "trials", "seed",
                                      "out", "threads", "audit_pairs"};
        bool ok = false;
        for (const char* name : known) ok = ok || it.key() == name;
        if (!ok) throw ConfigError("config: unknown field '" + it.key() + "'");
    }
    cfg.validate();
}

inline void to_json(json& j, const ExperimentConfig& cfg) {
    j = json{{"algorithm", to_string(cfg.algorithm)},
             {"d", cfg.d},
             {"k", cfg.k},
             {"n", cfg.n},
             {"ell", cfg.ell},
             {"gamma", cfg.gamma},
             {"eps", cfg.eps},
             {"delta", cfg.delta},
             {"alpha", cfg.alpha},
             {"beta", cfg.beta},
             {"c0", cfg.c0},
             {"c1", cfg.c1},
             {"c2", cfg.c2},
             {"c3", cfg.c3},
             {"trials", cfg.trials},
             {"seed", cfg.base_seed},
             {"out", cfg.out_path},
             {"threads", cfg.threads},
             {"audit_pairs", cfg.audit_pairs}};
}

struct TrialRecord {
    int trial_id;
    std::uint64_t seed;
    Algorithm algorithm;
    int d, k, n, ell;
    double gamma, eps, delta, alpha, beta;
    double c0, c1, c2, c3;
    std::optional<double> measured_error;  // present iff outcome != NULL_OR_BOT
    Outcome outcome;
    double wall_time_ms;
};

inline const char* trial_csv_header() {
    return "trial_id,seed,algorithm,d,k,n,ell,gamma,eps,delta,alpha,beta,c0,c1,c2,c3,"
           "measured_error,outcome,wall_time_ms";
}

inline std::string trial_csv_row(const TrialRecord& r) {
    std::ostringstream out;
    out.precision(17);
    out << r.trial_id << ',' << r.seed << ',' << to_string(r.algorithm) << ',' << r.d << ',' << r.k
        << ',' << r.n << ',' << r.ell << ',' << r.gamma << ',' << r.eps << ',' << r.delta << ','
        << r.alpha << ',' << r.beta << ',' << r.c0 << ',' << r.c1 << ',' << r.c2 << ',' << r.c3
        << ',';
    if (r.measured_error.has_value()) out << *r.measured_error;
    out << ',' << to_string(r.outcome) << ',' << r.wall_time_ms;
    return out.str();
}

inline TrialRecord parse_trial_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) fields.push_back(cell);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    if (fields.size() != 19) throw ConfigError("trial row: expected 19 fields, got " + std::to_string(fields.size()));
    TrialRecord r{};
    r.trial_id = std::stoi(fields[0]);
    r.seed = std::stoull(fields[1]);
    r.algorithm = algorithm_from_string(fields[2]);
    r.d = std::stoi(fields[3]);
    r.k = std::stoi(fields[4]);
    r.n = std::stoi(fields[5]);
    r.ell = std::stoi(fields[6]);
    r.gamma = std::stod(fields[7]);
    r.eps = std::stod(fields[8]);
    r.delta = std::stod(fields[9]);
    r.alpha = std::stod(fields[10]);
    r.beta = std::stod(fields[11]);
    r.c0 = std::stod(fields[12]);
    r.c1 = std::stod(fields[13]);
    r.c2 = std::stod(fields[14]);
    r.c3 = std::stod(fields[15]);
    if (!fields[16].empty()) r.measured_error = std::stod(fields[16]);
    const std::string& o = fields[17];
    r.outcome = o == "SUCCESS" ? Outcome::Success : o == "WRONG" ? Outcome::Wrong : Outcome::NullOrBot;
    if (o != "SUCCESS" && o != "WRONG" && o != "NULL_OR_BOT") throw ConfigError("trial row: bad outcome " + o);
    r.wall_time_ms = std::stod(fields[18]);
    if (r.measured_error.has_value() == (r.outcome == Outcome::NullOrBot)) {
        throw ConfigError("trial row: measured_error presence inconsistent with outcome");
    }
    return r;
}

struct RunSummary {
    int trials = 0;
    int successes = 0;
    double success_rate = std::numeric_limits<double>::quiet_NaN();
    std::vector<TrialRecord> records;
};

namespace detail {

inline TrialRecord run_one_trial(const ExperimentConfig& cfg, int trial) {
    const std::uint64_t seed = child_seed(cfg.base_seed, static_cast<std::uint64_t>(trial));
    Rng rng = make_rng(seed);
    TrialRecord rec{};
    rec.trial_id = trial;
    rec.seed = seed;
    rec.algorithm = cfg.algorithm;
    rec.d = cfg.d;
    rec.k = cfg.k;
    rec.n = cfg.n;
    rec.ell = cfg.ell;
    rec.gamma = cfg.gamma;
    rec.eps = cfg.eps;
    rec.delta = cfg.delta;
    rec.alpha = cfg.alpha;
    rec.beta = cfg.beta;
    rec.c0 = cfg.c0;
    rec.c1 = cfg.c1;
    rec.c2 = cfg.c2;
    rec.c3 = cfg.c3;

    const auto start = std::chrono::steady_clock::now();
    if (cfg.algorithm == Algorithm::Exact) {
        const ExactInstance inst = gen_exact_instance(cfg.d, cfg.k, cfg.n, cfg.ell, rng);
        const DpeseResult result = dpese(inst.data, cfg.exact_config(), rng);
        if (!result.subspace.has_value()) {
            rec.outcome = Outcome::NullOrBot;
        } else {
            const double err = projector_distance(projector_of(*result.subspace), projector_of(inst.truth));
            rec.measured_error = err;
            rec.outcome = err <= 1e-7 ? Outcome::Success : Outcome::Wrong;
        }
    } else {
        const CovarianceModel model = make_covariance(SpectrumSpec::gapped(cfg.d, cfg.k, cfg.gamma), rng);
        const int n_total = cfg.algorithm == Algorithm::Boosted
                                ? cfg.n * static_cast<int>(std::ceil(cfg.c3 * std::log(1.0 / cfg.beta)))
                                : cfg.n;
        const Matrix x = sample_gaussian(model.sigma, n_total, rng);
        std::optional<ProjectionMatrix> projector;
        if (cfg.algorithm == Algorithm::Approx) {
            projector = dpase(x, cfg.approx_config(), rng).projector;
        } else {
            projector = dpaseb(x, cfg.approx_config(), cfg.beta, rng).projector;
        }
        if (!projector.has_value()) {
            rec.outcome = Outcome::NullOrBot;
        } else {
            const double err = projector_distance(*projector, model.truth);
            rec.measured_error = err;
            rec.outcome = err <= cfg.alpha ? Outcome::Success : Outcome::Wrong;
        }
    }
    rec.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

inline TrialRecord failed_trial_record(const ExperimentConfig& cfg, int trial) {
    TrialRecord rec{};
    rec.trial_id = trial;
    rec.seed = child_seed(cfg.base_seed, static_cast<std::uint64_t>(trial));
    rec.algorithm = cfg.algorithm;
    rec.d = cfg.d;
    rec.k = cfg.k;
    rec.n = cfg.n;
    rec.ell = cfg.ell;
    rec.gamma = cfg.gamma;
    rec.eps = cfg.eps;
    rec.delta = cfg.delta;
    rec.alpha = cfg.alpha;
    rec.beta = cfg.beta;
    rec.c0 = cfg.c0;
    rec.c1 = cfg.c1;
    rec.c2 = cfg.c2;
    rec.c3 = cfg.c3;
    rec.outcome = Outcome::NullOrBot;
    rec.wall_time_ms = 0.0;
    return rec;
}

}  // namespace detail

// Runs cfg.trials seeded trials (child seed = mix of base seed and trial id),
// optionally across a worker pool; output order is by trial id either way.
inline RunSummary run_trials(const ExperimentConfig& cfg) {
    cfg.validate();
    RunSummary summary;
    summary.trials = cfg.trials;
    summary.records.resize(static_cast<std::size_t>(cfg.trials));

    const int workers = std::max(1, std::min(cfg.threads, cfg.trials));
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    auto work = [&]() {
        while (true) {
            const int trial = next.fetch_add(1);
            if (trial >= cfg.trials) break;
            // a failed trial is data, not an error; the batch never aborts
            try {
                summary.records[static_cast<std::size_t>(trial)] = detail::run_one_trial(cfg, trial);
            } catch (const std::exception&) {
                TrialRecord& rec = summary.records[static_cast<std::size_t>(trial)];
                rec = detail::failed_trial_record(cfg, trial);
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }

    for (const TrialRecord& r : summary.records) summary.successes += r.outcome == Outcome::Success ? 1 : 0;
    if (cfg.trials > 0) summary.success_rate = static_cast<double>(summary.successes) / cfg.trials;
    return summary;
}

inline void write_trials_csv(const std::string& path, const RunSummary& summary) {
    std::ofstream out(path);
    if (!out) throw Error("write_trials_csv: cannot open " + path);
    out << trial_csv_header() << "\n";
    for (const TrialRecord& r : summary.records) out << trial_csv_row(r) << "\n";
}

struct AuditReport {
    int pairs = 0;
    int exact_max_score_dev = 0;       // exact path
    std::int64_t approx_max_l1 = 0;    // approx path
    int approx_max_cells_changed = 0;  // approx path
    bool pass = false;
};

inline json audit_report_json(const AuditReport& rep, Algorithm algorithm) {
    return json{{"algorithm", to_string(algorithm)},
                {"pairs", rep.pairs},
                {"exact_max_score_dev", rep.exact_max_score_dev},
                {"approx_max_l1", rep.approx_max_l1},
                {"approx_max_cells_changed", rep.approx_max_cells_changed},
                {"pass", rep.pass}};
}

// Replaces one random column per pair and reports the worst observed score
// deviation (exact path) or raw histogram count deviation (approx path).
inline AuditReport sensitivity_audit(const ExperimentConfig& cfg) {
    cfg.validate();
    AuditReport rep;
    rep.pairs = cfg.audit_pairs;
    if (cfg.algorithm == Algorithm::Exact) {
        const ExactConfig ecfg = cfg.exact_config();
        for (int pair = 0; pair < cfg.audit_pairs; ++pair) {
            Rng rng = make_rng(child_seed(cfg.base_seed, 0xA0D17ULL + static_cast<std::uint64_t>(pair)));
            const ExactInstance inst = gen_exact_instance(cfg.d, cfg.k, cfg.n, cfg.ell, rng);
            Matrix x = inst.data;
            Matrix xp = x;
            const int col = static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.n));
            for (int i = 0; i < cfg.d; ++i) xp(i, col) = standard_normal(rng);

            const CandidateSet cands = enumerate_candidates(x, ecfg, true);
            const CandidateSet cands_p = enumerate_candidates(xp, ecfg, true);
            for (std::size_t a = 0; a < cands.subspaces.size(); ++a) {
                for (std::size_t b = 0; b < cands_p.subspaces.size(); ++b) {
                    if (projector_distance(cands.projectors[a], cands_p.projectors[b]) > 1e-7) continue;
                    const int dev = std::abs(exact_score(x, cands.subspaces[a], ecfg) -
                                             exact_score(xp, cands_p.subspaces[b], ecfg));
                    rep.exact_max_score_dev = std::max(rep.exact_max_score_dev, dev);
                }
            }
        }
        rep.pass = rep.exact_max_score_dev <= 1;
    } else {
        const ApproxConfig acfg = cfg.approx_config();
        for (int pair = 0; pair < cfg.audit_pairs; ++pair) {
            Rng rng = make_rng(child_seed(cfg.base_seed, 0xB0D17ULL + static_cast<std::uint64_t>(pair)));
            const CovarianceModel model = make_covariance(SpectrumSpec::gapped(cfg.d, cfg.k, cfg.gamma), rng);
            const Matrix x = sample_gaussian(model.sigma, cfg.n, rng);
            Matrix xp = x;
            const int col = static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.n));
            for (int i = 0; i < cfg.d; ++i) xp(i, col) = standard_normal(rng);

            const DerivedParams params = derive_params(cfg.n, cfg.d, acfg);
            const std::vector<Vector> refs = draw_reference_points(cfg.d, params.q, rng);
            const OffsetLattice lat{params.cell_side, uniform01(rng), params.q * cfg.d};
            auto keys_of = [&](const Matrix& data) {
                std::vector<CellKey> keys;
                for (const Vector& s : block_reference_stacks(data, acfg, params, refs)) {
                    keys.push_back(cell_key(s, lat));
                }
                return keys;
            };
            const auto counts = histogram_raw_counts(keys_of(x));
            const auto counts_p = histogram_raw_counts(keys_of(xp));

            std::int64_t l1 = 0;
            int cells_changed = 0;
            auto absorb = [&](const CellKey& key, std::int64_t a, std::int64_t b) {
                if (a != b) {
                    l1 += std::abs(a - b);
                    ++cells_changed;
                }
                (void)key;
            };
            for (const auto& [key, count] : counts) {
                auto it = counts_p.find(key);
                absorb(key, count, it == counts_p.end() ? 0 : it->second);
            }
            for (const auto& [key, count] : counts_p) {
                if (counts.find(key) == counts.end()) absorb(key, 0, count);
            }
            rep.approx_max_l1 = std::max(rep.approx_max_l1, l1);
            rep.approx_max_cells_changed = std::max(rep.approx_max_cells_changed, cells_changed);
        }
        rep.pass = rep.approx_max_l1 <= 2 && rep.approx_max_cells_changed <= 2;
    }
    return rep;
}

struct ConstantTuple {
    double c0, c1, c2, c3;
};

struct CalibrationRow {
    ConstantTuple constants;
    double success_rate;
    bool feasible;
};

struct CalibrationResult {
    ConstantTuple best;
    std::vector<CalibrationRow> table;
};

// Sweeps the constant grid at the configured desk-scale setup; the winner is
// the cheapest feasible tuple in lexicographic (c0, c1, c2, c3) order.
inline CalibrationResult calibrate_constants(const ExperimentConfig& base,
                                             const std::vector<ConstantTuple>& grid,
                                             double threshold = 0.65) {
    if (grid.empty()) throw ConfigError("calibrate_constants: empty grid");
    CalibrationResult result;
    bool found = false;
    for (const ConstantTuple& tuple : grid) {
        ExperimentConfig cfg = base;
        cfg.algorithm = Algorithm::Approx;
        cfg.c0 = tuple.c0;
        cfg.c1 = tuple.c1;
        cfg.c2 = tuple.c2;
        cfg.c3 = tuple.c3;
        double rate = 0.0;
        try {
            rate = run_trials(cfg).success_rate;
        } catch (const InsufficientData&) {
            rate = 0.0;  // infeasible tuple at this n
        }
        const bool feasible = rate >= threshold;
        result.table.push_back(CalibrationRow{tuple, rate, feasible});
        auto cheaper = [](const ConstantTuple& a, const ConstantTuple& b) {
            return std::tie(a.c0, a.c1, a.c2, a.c3) < std::tie(b.c0, b.c1, b.c2, b.c3);
        };
        if (feasible && (!found || cheaper(tuple, result.best))) {
            result.best = tuple;
            found = true;
        }
    }
    if (!found) throw NoFeasiblePoint();
    return result;
}

}  // namespace dpss
