// Acceptance gate: one pass/fail line per criterion, exit 1 on any failure.
// Every check is seeded, so reruns are bit-identical.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "dpss/harness.hpp"

using namespace dpss;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    if (!pass) ++g_failures;
    std::fflush(stdout);
}

OrthonormalBasis random_basis(int d, int k, Rng& rng) {
    Matrix g(d, k);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < k; ++j) g(i, j) = standard_normal(rng);
    return orthonormalize(g, 1e-12);
}

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = standard_normal(rng);
    return m;
}

// exhaustive scorer for k <= 2: for k=1 the only proper subspace is {0};
// for k=2 the optimal proper subspace is a line through a member point
int brute_force_score(const Matrix& x, const OrthonormalBasis& s, double tol) {
    std::vector<Vector> members;
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        if (x.col(i).norm() == 0.0) continue;
        if (contains(s, x.col(i), tol)) members.push_back(x.col(i));
    }
    if (s.rank() == 1) return static_cast<int>(members.size());
    int best_line = 0;
    for (const Vector& p : members) {
        const auto line = orthonormalize({p}, tol);
        int count = 0;
        for (const Vector& q : members) {
            if (contains(line, q, tol)) ++count;
        }
        best_line = std::max(best_line, count);
    }
    return static_cast<int>(members.size()) - best_line;
}

// criterion-5 configuration; the constants are the calibration artifact
ExperimentConfig approx_reference_config() {
    ExperimentConfig cfg;
    cfg.algorithm = Algorithm::Approx;
    cfg.d = 16;
    cfg.k = 2;
    cfg.n = 6600;
    cfg.gamma = 1e-4;
    cfg.eps = 1.0;
    cfg.delta = 0.01;
    cfg.alpha = 0.1;
    cfg.c0 = 8.0;
    cfg.c1 = 2.0;
    cfg.c2 = 120.0;
    cfg.c3 = 18.0;
    return cfg;
}

void criterion1_exact_determinism() {
    ExperimentConfig cfg;
    cfg.algorithm = Algorithm::Exact;
    cfg.d = 6;
    cfg.k = 2;
    cfg.n = 45;
    cfg.ell = 1;
    cfg.eps = 1.0;
    cfg.delta = 0.01;
    cfg.trials = 100;
    cfg.base_seed = 1001;
    cfg.threads = 4;
    const RunSummary s = run_trials(cfg);
    bool all = s.successes == 100;
    double worst = 0.0;
    for (const TrialRecord& r : s.records) {
        if (r.measured_error) worst = std::max(worst, *r.measured_error);
    }
    all = all && worst <= 1e-7;
    report(1, "exact-case determinism", all,
           std::to_string(s.successes) + "/100 recovered, worst error " + std::to_string(worst));
}

void criterion2_score_gaps() {
    ExactConfig cfg;
    cfg.k = 2;
    cfg.ell = 1;
    cfg.pp = PrivacyParams{1.0, 0.01};
    const int n = 45;
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng = make_rng(child_seed(2001, seed));
        const ExactInstance inst = gen_exact_instance(6, 2, n, 1, rng);
        const CandidateSet cands = enumerate_candidates(inst.data, cfg, true);
        for (std::size_t i = 0; i < cands.subspaces.size(); ++i) {
            const int u = exact_score(inst.data, cands.subspaces[i], cfg);
            const bool is_truth = sin_theta_distance(cands.subspaces[i], inst.truth) <= 1e-7;
            if (is_truth && u < n - 2 * cfg.ell) ++violations;
            if (!is_truth && u > 2 * cfg.ell) ++violations;
        }
    }
    report(2, "exact-case score gaps", violations == 0,
           std::to_string(violations) + " violations over 50 instances");
}

void criterion3_sensitivity_audits() {
    ExperimentConfig exact_cfg;
    exact_cfg.algorithm = Algorithm::Exact;
    exact_cfg.d = 4;
    exact_cfg.k = 2;
    exact_cfg.n = 8;
    exact_cfg.ell = 1;
    exact_cfg.audit_pairs = 300;
    exact_cfg.base_seed = 3001;
    const AuditReport exact_rep = sensitivity_audit(exact_cfg);

    ExperimentConfig approx_cfg;
    approx_cfg.algorithm = Algorithm::Approx;
    approx_cfg.d = 8;
    approx_cfg.k = 2;
    approx_cfg.n = 370;
    approx_cfg.gamma = 1e-3;
    approx_cfg.audit_pairs = 300;
    approx_cfg.base_seed = 3002;
    const AuditReport approx_rep = sensitivity_audit(approx_cfg);

    report(3, "sensitivity audits", exact_rep.pass && approx_rep.pass,
           "exact max |du| = " + std::to_string(exact_rep.exact_max_score_dev) +
               ", approx max L1 = " + std::to_string(approx_rep.approx_max_l1) + " across <= " +
               std::to_string(approx_rep.approx_max_cells_changed) + " cells");
}

void criterion4_truncated_laplace() {
    const TLapDist dist = tlap_params(2.0, PrivacyParams{1.0, 0.01});
    Rng rng = make_rng(4001);
    const int draws = 1000000;
    const int bins = 10;
    std::vector<int> counts(bins, 0);
    double sum = 0.0;
    bool bounded = true;
    for (int i = 0; i < draws; ++i) {
        const double x = tlap_sample(dist, rng);
        bounded = bounded && std::abs(x) <= 8.9296 + 1e-3;  // published bound, A = 8.92984
        sum += x;
        int bin = static_cast<int>((x + dist.bound_a) / (2.0 * dist.bound_a) * bins);
        bin = std::max(0, std::min(bins - 1, bin));
        ++counts[static_cast<std::size_t>(bin)];
    }
    const double mean = sum / draws;
    // closed-form mass of B exp(-|x|/lambda) over [lo, hi]
    auto cdf_piece = [&](double lo, double hi) {
        auto antider = [&](double v) {
            return v >= 0.0 ? -dist.lambda * std::exp(-v / dist.lambda)
                            : dist.lambda * std::exp(v / dist.lambda) - 2.0 * dist.lambda;
        };
        return dist.norm_b * (antider(hi) - antider(lo));
    };
    double worst_mass_dev = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double lo = -dist.bound_a + 2.0 * dist.bound_a * b / bins;
        const double hi = -dist.bound_a + 2.0 * dist.bound_a * (b + 1) / bins;
        const double expected = cdf_piece(lo, hi);
        const double got = static_cast<double>(counts[static_cast<std::size_t>(b)]) / draws;
        worst_mass_dev = std::max(worst_mass_dev, std::abs(got - expected));
    }
    const bool pass = bounded && std::abs(mean) <= 0.02 && worst_mass_dev <= 0.01;
    report(4, "truncated Laplace statistics", pass,
           "mean " + std::to_string(mean) + ", worst interval deviation " + std::to_string(worst_mass_dev));
}

void criterion5_approx_monte_carlo() {
    ExperimentConfig cfg = approx_reference_config();
    cfg.trials = 40;
    cfg.base_seed = 5001;
    cfg.threads = 4;
    const RunSummary s = run_trials(cfg);
    report(5, "approximate-case success rate", s.success_rate >= 0.65,
           std::to_string(s.successes) + "/40 within alpha");
}

void criterion6_degenerate_input() {
    // samples drawn exactly from a k-subspace; gamma in the config only sets
    // the lattice scale and is taken tiny
    ApproxConfig cfg;
    cfg.pp = PrivacyParams{1.0, 0.01};
    cfg.k = 2;
    cfg.gamma = 1e-12;
    cfg.alpha = 0.1;
    int successes = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = make_rng(child_seed(6001, seed));
        const OrthonormalBasis truth = random_basis(16, 2, rng);
        Matrix coeff(2, 6600);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 6600; ++j) coeff(i, j) = standard_normal(rng);
        const Matrix x = truth.columns * coeff;
        const DpaseResult res = dpase(x, cfg, rng);
        if (!res.projector) continue;
        const double err = projector_distance(*res.projector, projector_of(truth));
        worst = std::max(worst, err);
        if (err <= 1e-8) ++successes;
    }
    report(6, "exact-rank degenerate input", successes == 20,
           std::to_string(successes) + "/20 within 1e-8, worst " + std::to_string(worst));
}

void criterion7_boosting() {
    const ExperimentConfig ref = approx_reference_config();
    const ApproxConfig cfg = ref.approx_config();
    const double beta = 0.1;
    const int r = static_cast<int>(std::ceil(cfg.c3 * std::log(1.0 / beta)));  // 42
    int good = 0;
    bool invariant = true;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = make_rng(child_seed(7001, seed));
        const CovarianceModel model = make_covariance(SpectrumSpec::gapped(ref.d, ref.k, ref.gamma), rng);
        const Matrix x = sample_gaussian(model.sigma, r * ref.n, rng);
        const DpasebResult res = dpaseb(x, cfg, beta, rng);
        if (!res.projector) continue;
        if (projector_distance(*res.projector, model.truth) <= 3.0 * cfg.alpha) ++good;
        int close = 0;
        for (const auto& sub : res.sub_outputs) {
            if (sub && projector_distance(*res.projector, *sub) <= 2.0 * cfg.alpha) ++close;
        }
        // the winner itself is one of the sub-outputs at distance zero
        if (close - 1 < 0.6 * r - 1.0) invariant = false;
    }
    report(7, "boosted estimator", good >= 18 && invariant,
           std::to_string(good) + "/20 within 3*alpha, invariant " + (invariant ? "held" : "VIOLATED"));
}

void criterion8_linalg_oracles() {
    Rng rng = make_rng(8001);
    int violations = 0;
    for (int trial = 0; trial < 500; ++trial) {  // sin-theta sandwich
        const int d = 2 + static_cast<int>(rng() % 11);
        const int k = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::min(4, d)));
        const auto u = random_basis(d, k, rng);
        const auto v = random_basis(d, k, rng);
        const double st = sin_theta_distance(u, v);
        const double pd = projector_distance(projector_of(u), projector_of(v));
        if (!(st <= pd + 1e-10 && pd <= 2.0 * st + 1e-8)) ++violations;
    }
    for (int trial = 0; trial < 200; ++trial) {  // Weyl
        const int rows = 1 + static_cast<int>(rng() % 8);
        const int cols = 1 + static_cast<int>(rng() % 8);
        const Matrix a = random_matrix(rows, cols, rng);
        const Matrix b = random_matrix(rows, cols, rng);
        const auto sa = singular_values(a);
        const auto sb = singular_values(b);
        const auto sab = singular_values(a + b);
        for (std::size_t i = 0; i < sab.size(); ++i) {
            if (sab[i] > sa[0] + sb[i] + 1e-8) ++violations;
        }
    }
    for (int trial = 0; trial < 200; ++trial) {  // least singular value
        const int rows = 1 + static_cast<int>(rng() % 8);
        const int cols = 1 + static_cast<int>(rng() % 8);
        const Matrix a = random_matrix(rows, cols, rng);
        const Matrix b = random_matrix(rows, cols, rng);
        if (singular_values(a + b).back() < singular_values(a).back() - operator_norm(b) - 1e-8) ++violations;
    }
    int checked = 0;
    while (checked < 100) {  // top-k vs dense SVD on distinct spectra, <= 6x6
        const int rows = 1 + static_cast<int>(rng() % 6);
        const int cols = 1 + static_cast<int>(rng() % 6);
        const Matrix m = random_matrix(rows, cols, rng);
        const auto sv = singular_values(m);
        bool distinct = true;
        for (std::size_t i = 1; i < sv.size(); ++i) distinct = distinct && sv[i - 1] - sv[i] > 1e-6;
        if (!distinct) continue;
        Eigen::JacobiSVD<Matrix> oracle(m, Eigen::ComputeFullU);
        for (int k = 1; k <= std::min(rows, cols); ++k) {
            const Matrix u = oracle.matrixU().leftCols(k);
            if (projector_distance(projector_of(top_k_subspace(m, k)), ProjectionMatrix{u * u.transpose(), k}) > 1e-8)
                ++violations;
        }
        ++checked;
    }
    report(8, "linear-algebra oracle suite", violations == 0,
           std::to_string(violations) + " violations");
}

void criterion9_score_oracle() {
    Rng rng = make_rng(9001);
    ExactConfig cfg;
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 2 + static_cast<int>(rng() % 3);  // <= 4
        const int k = 1 + static_cast<int>(rng() % 2);  // <= 2
        if (d <= k) continue;
        const int n = k + static_cast<int>(rng() % static_cast<std::uint64_t>(7 - k));  // <= 6
        cfg.k = k;
        cfg.ell = k - 1;
        Matrix x;
        if (rng() % 2 == 0) {
            x = random_matrix(d, n, rng);
        } else {
            x = gen_exact_instance(d, k, std::max(n, k + 1), k - 1 + static_cast<int>(rng() % 2), rng).data;
        }
        const CandidateSet cands = enumerate_candidates(x, cfg, true);
        for (const OrthonormalBasis& s : cands.subspaces) {
            if (exact_score(x, s, cfg) != brute_force_score(x, s, cfg.tol)) ++mismatches;
        }
    }
    report(9, "brute-force score oracle", mismatches == 0,
           std::to_string(mismatches) + " mismatches over 200 instances");
}

void criterion10_sampler_self_tests() {
    Rng r1 = make_rng(10001), r2 = make_rng(10001);
    const SelfTestReport a = sampler_self_test(2, 3.0, 20000, r1);
    const SelfTestReport b = sampler_self_test(2, 3.0, 20000, r2);
    const bool reproducible = a.chi2_empirical == b.chi2_empirical && a.band_worst_c == b.band_worst_c;
    report(10, "sampler self-tests", a.pass && reproducible,
           "chi2 " + std::to_string(a.chi2_empirical) + " <= " + std::to_string(a.chi2_tail_bound) +
               ", band pass fraction " + std::to_string(a.band_pass_fraction) +
               (reproducible ? ", reproducible" : ", NOT reproducible"));
}

}  // namespace

int main() {
    criterion1_exact_determinism();
    criterion2_score_gaps();
    criterion3_sensitivity_audits();
    criterion4_truncated_laplace();
    criterion5_approx_monte_carlo();
    criterion6_degenerate_input();
    criterion7_boosting();
    criterion8_linalg_oracles();
    criterion9_score_oracle();
    criterion10_sampler_self_tests();
    std::printf("%s: %d/10 criteria passed\n", g_failures == 0 ? "OK" : "FAILED", 10 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
