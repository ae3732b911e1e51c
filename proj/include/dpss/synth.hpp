#pragma once

// Seeded generators for the two problem families: exact-case instances
// (points in a k-subspace plus a few adversarial points) and Gaussian data
// with a controlled spectral gap. Includes statistical self-tests for the
// sampler and CSV serialization of instances.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dpss/exact.hpp"
#include "dpss/linalg.hpp"
#include "dpss/random.hpp"

namespace dpss {

struct SpectrumSpec {
    Vector eigenvalues;  // descending, lambda_k normalized to 1
    int k;
    double gamma;  // lambda_{k+1} <= gamma^2 * lambda_k

    void validate() const {
        if (k < 1 || k > eigenvalues.size()) throw ConfigError("SpectrumSpec: k out of range");
        for (Eigen::Index i = 1; i < eigenvalues.size(); ++i) {
            if (eigenvalues(i) > eigenvalues(i - 1) + 1e-12) throw ConfigError("SpectrumSpec: eigenvalues not descending");
        }
        if (eigenvalues(eigenvalues.size() - 1) < 0.0) throw ConfigError("SpectrumSpec: negative eigenvalue");
    }

    static SpectrumSpec gapped(int d, int k, double gamma) {
        Vector ev = Vector::Zero(d);
        for (int i = 0; i < k; ++i) ev(i) = 1.0;
        for (int i = k; i < d; ++i) ev(i) = gamma * gamma;
        return SpectrumSpec{ev, k, gamma};
    }
};

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// sign of R's diagonal folded into Q.
inline Matrix haar_orthogonal(int d, Rng& rng) {
    Matrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = standard_normal(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

struct CovarianceModel {
    Matrix sigma;
    ProjectionMatrix truth;  // projector onto the top-k eigenspace
};

inline CovarianceModel make_covariance(const SpectrumSpec& spec, Rng& rng) {
    spec.validate();
    const int d = static_cast<int>(spec.eigenvalues.size());
    const Matrix rot = haar_orthogonal(d, rng);
    CovarianceModel model;
    model.sigma = rot * spec.eigenvalues.asDiagonal() * rot.transpose();
    const Matrix top = rot.leftCols(spec.k);
    model.truth = ProjectionMatrix{top * top.transpose(), spec.k};
    return model;
}

/// Columns i.i.d. N(0, Sigma) via the symmetric square root.
inline Matrix sample_gaussian(const Matrix& sigma, int n, Rng& rng) {
    const int d = static_cast<int>(sigma.rows());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    Vector ev = es.eigenvalues().cwiseMax(0.0);
    const Matrix root = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    Matrix x(d, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < d; ++i) x(i, j) = standard_normal(rng);
    return root * x;
}

struct ExactInstance {
    Matrix data;             // d x n
    OrthonormalBasis truth;  // s*
    int adversarial_count;
};

namespace detail {

// Problem-1 check, brute force: n - ell members of s*, and no (k-1)-subset
// span holding more than ell points. Only feasible at desk scale.
inline bool verify_exact_instance(const ExactInstance& inst, int k, int ell, double tol) {
    const int n = static_cast<int>(inst.data.cols());
    int members = 0;
    for (int i = 0; i < n; ++i) {
        if (contains(inst.truth, inst.data.col(i), tol)) ++members;
    }
    if (members < n - ell) return false;

    std::vector<Vector> cols;
    cols.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) cols.push_back(inst.data.col(i));
    for (int subset_size = 1; subset_size <= k - 1; ++subset_size) {
        bool ok = true;
        for_each_subset(n, subset_size, [&](const std::vector<int>& idx) {
            if (!ok) return;
            std::vector<Vector> sub;
            for (int i : idx) sub.push_back(cols[static_cast<std::size_t>(i)]);
            OrthonormalBasis span;
            try {
                span = orthonormalize(sub, tol);
            } catch (const AllZeroInput&) {
                return;
            }
            if (span.rank() >= k) return;
            int count = 0;
            for (const Vector& p : cols) {
                if (contains(span, p, tol)) ++count;
            }
            if (count > ell) ok = false;
        });
        if (!ok) return false;
    }
    return true;
}

}  // namespace detail

// Continuous draws put the points in general position almost surely; the
// brute-force verification is gated to desk scale (n <= 200, k <= 3).
inline ExactInstance gen_exact_instance(int d, int k, int n, int ell, Rng& rng) {
    if (n < k || ell < k - 1 || d <= k) throw ConfigError("gen_exact_instance: need n >= k, ell >= k-1, d > k");
    const int adversarial = std::min(ell, n - k);
    for (int attempt = 0; attempt < 50; ++attempt) {
        Matrix span(d, k);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < k; ++j) span(i, j) = standard_normal(rng);
        const OrthonormalBasis truth = orthonormalize(span, 1e-12);
        if (truth.rank() != k) continue;

        Matrix data(d, n);
        for (int j = 0; j < n - adversarial; ++j) {
            Vector coeff(k);
            for (int i = 0; i < k; ++i) coeff(i) = standard_normal(rng);
            data.col(j) = truth.columns * coeff;
        }
        for (int j = n - adversarial; j < n; ++j) {
            for (int i = 0; i < d; ++i) data(i, j) = standard_normal(rng);
        }

        ExactInstance inst{std::move(data), truth, adversarial};
        if (n <= 200 && k <= 3) {
            if (!detail::verify_exact_instance(inst, k, ell, 1e-9)) continue;
        }
        return inst;
    }
    throw VerificationFailed("gen_exact_instance: general-position check kept failing");
}

struct SelfTestReport {
    double chi2_threshold;
    double chi2_tail_bound;      // e^{-t} plus sampling slack
    double chi2_empirical;
    double band_pass_fraction;   // fraction of trials with fitted C <= 3
    double band_worst_c;
    bool pass;
};

// Checks the chi-square tail of rank-k projected Gaussian norms and the
// singular-value band sqrt(m) +- C(sqrt(d) + u) of a Gaussian matrix at u=2.
inline SelfTestReport sampler_self_test(int k, double t_param, int trials, Rng& rng,
                                        int band_d = 8, int band_m = 200, int band_trials = 200) {
    if (trials < 10000) throw ConfigError("sampler_self_test: trials must be >= 10^4");
    const int d = k + 5;
    const Matrix rot = haar_orthogonal(d, rng);
    const Matrix basis = rot.leftCols(k);

    const double threshold = k + 2.0 * std::sqrt(k * t_param) + 2.0 * t_param;
    int exceed = 0;
    for (int trial = 0; trial < trials; ++trial) {
        Vector z(d);
        for (int i = 0; i < d; ++i) z(i) = standard_normal(rng);
        const Vector proj = basis * (basis.transpose() * z);
        if (proj.squaredNorm() > threshold) ++exceed;
    }
    const double p_bound = std::exp(-t_param);
    const double slack = 3.0 * std::sqrt(p_bound * (1.0 - p_bound) / trials);

    int band_pass = 0;
    double worst_c = 0.0;
    for (int trial = 0; trial < band_trials; ++trial) {
        Matrix g(band_d, band_m);
        for (int i = 0; i < band_d; ++i)
            for (int j = 0; j < band_m; ++j) g(i, j) = standard_normal(rng);
        const std::vector<double> sv = singular_values(g);
        double dev = 0.0;
        for (double s : sv) dev = std::max(dev, std::abs(s - std::sqrt(static_cast<double>(band_m))));
        const double fitted_c = dev / (std::sqrt(static_cast<double>(band_d)) + 2.0);
        worst_c = std::max(worst_c, fitted_c);
        if (fitted_c <= 3.0) ++band_pass;
    }

    SelfTestReport report;
    report.chi2_threshold = threshold;
    report.chi2_tail_bound = p_bound + slack;
    report.chi2_empirical = static_cast<double>(exceed) / trials;
    report.band_pass_fraction = static_cast<double>(band_pass) / band_trials;
    report.band_worst_c = worst_c;
    report.pass = report.chi2_empirical <= report.chi2_tail_bound && report.band_pass_fraction >= 0.99;
    return report;
}

// --- instance serialization -------------------------------------------------
// CSV, row-major, with a header line carrying d, n, k and the seed; the truth
// projector goes in a sibling file with the same layout.

inline void save_matrix_csv(const std::string& path, const Matrix& m, int k, std::uint64_t seed) {
    std::ofstream out(path);
    if (!out) throw Error("save_matrix_csv: cannot open " + path);
    out << "# d=" << m.rows() << " n=" << m.cols() << " k=" << k << " seed=" << seed << "\n";
    out.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << m(i, j) << (j + 1 < m.cols() ? "," : "\n");
        }
    }
}

struct LoadedMatrix {
    Matrix data;
    int d, n, k;
    std::uint64_t seed;
};

inline LoadedMatrix load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_matrix_csv: cannot open " + path);
    std::string header;
    std::getline(in, header);
    LoadedMatrix out{};
    if (std::sscanf(header.c_str(), "# d=%d n=%d k=%d seed=%llu", &out.d, &out.n, &out.k,
                    reinterpret_cast<unsigned long long*>(&out.seed)) != 4) {
        throw Error("load_matrix_csv: malformed header");
    }
    out.data.resize(out.d, out.n);
    std::string line;
    for (int i = 0; i < out.d; ++i) {
        if (!std::getline(in, line)) throw Error("load_matrix_csv: truncated file");
        std::stringstream ss(line);
        std::string cell;
        for (int j = 0; j < out.n; ++j) {
            if (!std::getline(ss, cell, ',')) throw Error("load_matrix_csv: short row");
            out.data(i, j) = std::stod(cell);
        }
    }
    return out;
}

}  // namespace dpss
