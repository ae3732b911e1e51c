#pragma once

// DPASE: subsample-and-aggregate subspace estimation. Each block of columns
// yields a non-private top-k projector; the projectors are compared through
// a shared set of Gaussian reference points, whose projections are stacked
// into one qd-vector per block and aggregated with a randomly-offset lattice
// histogram. DPASEB boosts the 0.7 success probability by majority vote
// over disjoint sub-runs.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "dpss/linalg.hpp"
#include "dpss/mechanisms.hpp"

namespace dpss {

struct ApproxConfig {
    PrivacyParams pp{1.0, 0.01};
    double alpha = 0.1;   // target projector error
    double gamma = 1e-4;  // upper bound on the spectral-gap ratio sqrt(l_{k+1}/l_k)
    int k = 1;
    // universal constants; defaults from the calibration sweep at desk scale
    double c0 = 8.0;
    double c1 = 2.0;
    double c2 = 120.0;
    double c3 = 18.0;
    bool random_representative = false;  // cell center unless set
};

struct DerivedParams {
    int t;             // number of blocks
    int m;             // columns per block
    int q;             // reference points
    double cell_side;  // lattice cell length
};

struct OffsetLattice {
    double side;    // > 0
    double offset;  // lambda in [0,1), one scalar shared by all coordinates
    int dim;        // q*d
};

inline DerivedParams derive_params(int n, int d, const ApproxConfig& cfg) {
    cfg.pp.validate();
    if (!(cfg.gamma > 0.0) || cfg.k < 1) throw ConfigError("derive_params: need gamma > 0 and k >= 1");
    const int t = static_cast<int>(std::ceil(cfg.c0 * std::log(1.0 / cfg.pp.delta) / cfg.pp.eps));
    if (t < 1) throw ConfigError("derive_params: t < 1");
    const int m = n / t;
    if (m < 1) throw InsufficientData("derive_params: fewer samples than blocks");
    if (m < cfg.k) throw InsufficientData("derive_params: block size below k");
    const int q = static_cast<int>(std::ceil(cfg.c1 * cfg.k));
    const double log_kt = std::max(0.0, std::log(static_cast<double>(cfg.k) * t));
    const double cell_side = cfg.c2 * cfg.gamma * std::sqrt(static_cast<double>(d) * cfg.k) *
                             (std::sqrt(static_cast<double>(cfg.k)) + std::sqrt(log_kt)) /
                             std::sqrt(static_cast<double>(m));
    if (!(cell_side > 0.0)) throw ConfigError("derive_params: cell side must be positive");
    return DerivedParams{t, m, q, cell_side};
}

inline CellKey cell_key(const Vector& x, const OffsetLattice& lat) {
    CellKey key(static_cast<std::size_t>(x.size()));
    for (Eigen::Index c = 0; c < x.size(); ++c) {
        key[static_cast<std::size_t>(c)] =
            static_cast<std::int64_t>(std::floor((x(c) - lat.offset * lat.side) / lat.side));
    }
    return key;
}

// One qd-vector per block: the concatenation (Pi_j p_1, ..., Pi_j p_q).
// Deterministic given the reference points, so it can be replayed for audits.
inline std::vector<Vector> block_reference_stacks(const Matrix& x, const ApproxConfig& cfg,
                                                  const DerivedParams& params,
                                                  const std::vector<Vector>& refs) {
    const int d = static_cast<int>(x.rows());
    std::vector<Vector> stacks;
    stacks.reserve(static_cast<std::size_t>(params.t));
    for (int j = 0; j < params.t; ++j) {
        const Matrix block = x.middleCols(static_cast<Eigen::Index>(j) * params.m, params.m);
        const OrthonormalBasis basis = top_k_subspace(block, cfg.k);
        Vector stacked(static_cast<Eigen::Index>(params.q) * d);
        for (int i = 0; i < params.q; ++i) {
            stacked.segment(static_cast<Eigen::Index>(i) * d, d) =
                basis.columns * (basis.columns.transpose() * refs[static_cast<std::size_t>(i)]);
        }
        stacks.push_back(std::move(stacked));
    }
    return stacks;
}

inline std::vector<Vector> draw_reference_points(int d, int q, Rng& rng) {
    std::vector<Vector> refs;
    refs.reserve(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i) {
        Vector p(d);
        for (int c = 0; c < d; ++c) p(c) = standard_normal(rng);
        refs.push_back(std::move(p));
    }
    return refs;
}

struct DpaseResult {
    std::optional<ProjectionMatrix> projector;  // nullopt means BOT
};

inline DpaseResult dpase(const Matrix& x, const ApproxConfig& cfg, Rng& rng) {
    const int d = static_cast<int>(x.rows());
    const int n = static_cast<int>(x.cols());
    const DerivedParams params = derive_params(n, d, cfg);
    // bounded histogram noise must not turn a full cell into BOT
    const double a = tlap_params(2.0, PrivacyParams{cfg.pp.eps, cfg.pp.delta / 2.0}).bound_a;
    if (params.t < 2.0 * a + 4.0) throw InsufficientData("dpase: t below 2*A(2,eps,delta/2) + 4");

    const std::vector<Vector> refs = draw_reference_points(d, params.q, rng);
    const OffsetLattice lat{params.cell_side, uniform01(rng), params.q * d};

    const std::vector<Vector> stacks = block_reference_stacks(x, cfg, params, refs);
    std::vector<CellKey> keys;
    keys.reserve(stacks.size());
    for (const Vector& s : stacks) keys.push_back(cell_key(s, lat));

    // the histogram is the only data-touching private step; full (eps, delta)
    const NoisyHistogram hist = stable_histogram(keys, cfg.pp, rng);

    const CellKey* winner = nullptr;
    double winner_count = 0.0;
    for (const auto& [key, noisy] : hist.cells) {
        if (noisy >= params.t / 2.0 && noisy > winner_count) {
            winner = &key;
            winner_count = noisy;
        }
    }
    if (winner == nullptr) return DpaseResult{std::nullopt};

    Vector rep(static_cast<Eigen::Index>(lat.dim));
    for (int c = 0; c < lat.dim; ++c) {
        const double frac = cfg.random_representative ? uniform01(rng) : 0.5;
        rep(c) = (static_cast<double>((*winner)[static_cast<std::size_t>(c)]) + lat.offset + frac) * lat.side;
    }

    Matrix p_hat(d, params.q);
    for (int i = 0; i < params.q; ++i) {
        p_hat.col(i) = rep.segment(static_cast<Eigen::Index>(i) * d, d);
    }
    return DpaseResult{projector_of(top_k_subspace(p_hat, cfg.k))};
}

// First sub-output within 2*alpha of at least 0.6r - 1 of the others.
inline std::optional<ProjectionMatrix> select_majority(
    const std::vector<std::optional<ProjectionMatrix>>& sub_outputs, double alpha) {
    const int r = static_cast<int>(sub_outputs.size());
    for (int i = 0; i < r; ++i) {
        const auto& pi = sub_outputs[static_cast<std::size_t>(i)];
        if (!pi.has_value()) continue;
        int close = 0;
        for (int j = 0; j < r; ++j) {
            if (j == i) continue;
            const auto& pj = sub_outputs[static_cast<std::size_t>(j)];
            if (pj.has_value() && projector_distance(*pi, *pj) <= 2.0 * alpha) ++close;
        }
        if (close >= 0.6 * r - 1.0) return pi;
    }
    return std::nullopt;
}

struct DpasebResult {
    std::optional<ProjectionMatrix> projector;       // nullopt means BOT
    std::vector<std::optional<ProjectionMatrix>> sub_outputs;
};

// Median-of-means style boost: r disjoint sub-runs at full (eps, delta) each
// (disjoint data, so the composition stays (eps, delta)-DP); return the first
// sub-output within 2*alpha of at least 0.6r - 1 others.
inline DpasebResult dpaseb(const Matrix& x, const ApproxConfig& cfg, double beta, Rng& rng) {
    if (!(beta > 0.0) || !(beta < 1.0)) throw ConfigError("dpaseb: beta must lie in (0,1)");
    const int n = static_cast<int>(x.cols());
    const int r = static_cast<int>(std::ceil(cfg.c3 * std::log(1.0 / beta)));
    const int block = n / r;
    if (block < 1) throw InsufficientData("dpaseb: fewer samples than sub-runs");

    DpasebResult result;
    result.sub_outputs.reserve(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
        Rng sub_rng = make_rng(rng());
        const Matrix sub = x.middleCols(static_cast<Eigen::Index>(i) * block, block);
        result.sub_outputs.push_back(dpase(sub, cfg, sub_rng).projector);
    }

    result.projector = select_majority(result.sub_outputs, cfg.alpha);
    return result;
}

}  // namespace dpss
