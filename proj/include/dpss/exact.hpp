#pragma once

// DPESE: enumerate the subspaces spanned by k-subsets of the data, score
// each by membership count minus the best strictly-smaller subspace, and
// select privately via GAP-MAX with a NULL fallback.

#include <cstdint>
#include <optional>
#include <vector>

#include "dpss/linalg.hpp"
#include "dpss/mechanisms.hpp"

namespace dpss {

struct ExactConfig {
    int k = 1;
    int ell = 0;  // robustness parameter; >= k-1 for valid instances
    PrivacyParams pp{1.0, 0.01};
    double tol = 1e-9;  // relative membership tolerance
    std::uint64_t max_candidate_subsets = 1'000'000;

    double null_score() const { return ell + 4.0 * std::log(1.0 / pp.delta) / pp.eps + 1.0; }
};

struct CandidateSet {
    std::vector<OrthonormalBasis> subspaces;       // deduplicated, each of rank exactly k
    std::vector<ProjectionMatrix> projectors;      // cached, aligned with subspaces
};

namespace detail {

inline std::uint64_t binomial_count(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
        if (r > (1ULL << 62)) return 1ULL << 62;
    }
    return r;
}

// Visits all size-k index subsets of {0,...,n-1} in lexicographic order.
template <typename F>
inline void for_each_subset(int n, int k, F&& visit) {
    if (k > n || k <= 0) return;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        visit(idx);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

}  // namespace detail

// Spans of all k-subsets of the columns, skipping rank-deficient subsets and
// deduplicating by projector distance. Zero columns never enlarge a span, so
// with allow_zero_columns they are silently carried (the private path needs
// this: privacy must hold on arbitrary input).
inline CandidateSet enumerate_candidates(const Matrix& x, const ExactConfig& cfg, bool allow_zero_columns = false) {
    const int n = static_cast<int>(x.cols());
    if (!allow_zero_columns) {
        for (int i = 0; i < n; ++i) {
            if (x.col(i).norm() == 0.0) throw ZeroPoint("enumerate_candidates: zero column");
        }
    }
    if (detail::binomial_count(n, cfg.k) > cfg.max_candidate_subsets) throw TooManyCandidates();

    CandidateSet out;
    detail::for_each_subset(n, cfg.k, [&](const std::vector<int>& idx) {
        std::vector<Vector> cols;
        cols.reserve(idx.size());
        for (int i : idx) cols.push_back(x.col(i));
        OrthonormalBasis span;
        try {
            span = orthonormalize(cols, cfg.tol);
        } catch (const AllZeroInput&) {
            return;
        }
        if (span.rank() != cfg.k) return;
        ProjectionMatrix proj = projector_of(span);
        for (const ProjectionMatrix& existing : out.projectors) {
            // max-entry bounds the operator norm from both sides; the SVD is
            // only needed in the narrow band between them
            const double max_entry = (existing.entries - proj.entries).cwiseAbs().maxCoeff();
            if (max_entry > 1e-7) continue;
            if (max_entry * proj.dim() <= 1e-7 || projector_distance(existing, proj) <= 1e-7) return;
        }
        out.subspaces.push_back(std::move(span));
        out.projectors.push_back(std::move(proj));
    });
    return out;
}

// Max number of the given points captured by any proper subspace t of s.
// An optimal t is spanned by points it contains, so it is enough to check
// spans of subsets of size < dim_s (the zero subspace holds no nonzero point).
inline int max_proper_subspace_count(const std::vector<Vector>& points_in_s, int dim_s, double tol) {
    if (points_in_s.empty()) return 0;
    const int m = static_cast<int>(points_in_s.size());
    int best = 0;
    for (int subset_size = 1; subset_size < dim_s; ++subset_size) {
        detail::for_each_subset(m, subset_size, [&](const std::vector<int>& idx) {
            std::vector<Vector> cols;
            cols.reserve(idx.size());
            for (int i : idx) cols.push_back(points_in_s[static_cast<std::size_t>(i)]);
            OrthonormalBasis span;
            try {
                span = orthonormalize(cols, tol);
            } catch (const AllZeroInput&) {
                return;
            }
            if (span.rank() >= dim_s) return;  // not a proper subspace of s
            int count = 0;
            for (const Vector& p : points_in_s) {
                if (contains(span, p, tol)) ++count;
            }
            best = std::max(best, count);
        });
    }
    return best;
}

/// u(X, s) = |X ∩ s| - sup{|X ∩ t| : t proper subspace of s}.
inline int exact_score(const Matrix& x, const OrthonormalBasis& s, const ExactConfig& cfg) {
    std::vector<Vector> members;
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        const Vector col = x.col(i);
        if (col.norm() == 0.0) continue;  // zero points belong to no candidate
        if (contains(s, col, cfg.tol)) members.push_back(col);
    }
    return static_cast<int>(members.size()) - max_proper_subspace_count(members, s.rank(), cfg.tol);
}

struct DpeseResult {
    std::optional<OrthonormalBasis> subspace;  // nullopt means NULL was selected
};

inline DpeseResult dpese(const Matrix& x, const ExactConfig& cfg, Rng& rng) {
    CandidateSet candidates = enumerate_candidates(x, cfg, /*allow_zero_columns=*/true);

    std::vector<ScoredCandidate> scored;
    scored.reserve(candidates.subspaces.size() + 1);
    scored.push_back(ScoredCandidate{-1, cfg.null_score(), /*is_null=*/true});
    for (std::size_t i = 0; i < candidates.subspaces.size(); ++i) {
        scored.push_back(ScoredCandidate{static_cast<int>(i),
                                         static_cast<double>(exact_score(x, candidates.subspaces[i], cfg)),
                                         false});
    }
    const int winner = gap_max(scored, cfg.pp, rng);
    if (winner < 0) return DpeseResult{std::nullopt};
    return DpeseResult{candidates.subspaces[static_cast<std::size_t>(winner)]};
}

}  // namespace dpss
