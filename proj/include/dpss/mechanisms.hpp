#pragma once

// The three privacy primitives: truncated Laplace noise, a stability-based
// private histogram over an unbounded cell domain, and GAP-MAX selection
// with a NULL fallback. All samplers take a caller-owned seeded rng.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "dpss/errors.hpp"
#include "dpss/random.hpp"

namespace dpss {

struct PrivacyParams {
    double eps;
    double delta;

    void validate() const {
        if (!(eps > 0.0) || !(delta > 0.0) || !(delta < 1.0)) throw InvalidBudget();
    }
};

// Truncated Laplace: density B*exp(-|x|/lambda) on [-A, A], zero outside.
// lambda = sens/eps, A = lambda*ln(1 + (e^eps - 1)/(2 delta)).
struct TLapDist {
    double delta_sens;
    double lambda;
    double bound_a;
    double norm_b;
};

inline TLapDist tlap_params(double delta_sens, const PrivacyParams& pp) {
    pp.validate();
    if (!(delta_sens > 0.0)) throw InvalidBudget("tlap_params: sensitivity must be positive");
    const double lambda = delta_sens / pp.eps;
    const double bound_a = lambda * std::log(1.0 + (std::exp(pp.eps) - 1.0) / (2.0 * pp.delta));
    const double norm_b = 1.0 / (2.0 * lambda * (1.0 - std::exp(-bound_a / lambda)));
    return TLapDist{delta_sens, lambda, bound_a, norm_b};
}

// Inverse-CDF draw; always lands in [-A, A].
inline double tlap_sample(const TLapDist& dist, Rng& rng) {
    const double u = uniform01(rng) - 0.5;
    const double sign = u < 0.0 ? -1.0 : 1.0;
    const double w = std::min(2.0 * std::abs(u), 1.0 - 1e-16);
    const double x = -dist.lambda * std::log1p(-w * (1.0 - std::exp(-dist.bound_a / dist.lambda)));
    return sign * std::min(x, dist.bound_a);
}

using CellKey = std::vector<std::int64_t>;

struct NoisyHistogram {
    std::map<CellKey, double> cells;  // noisy counts of retained cells only
    double threshold = 0.0;
    std::int64_t total_points = 0;
};

inline std::map<CellKey, std::int64_t> histogram_raw_counts(const std::vector<CellKey>& keys) {
    std::map<CellKey, std::int64_t> counts;
    for (const CellKey& key : keys) ++counts[key];
    return counts;
}

// Stability histogram: noise only the occupied cells with TLap(2, eps, delta/2)
// and keep those whose noisy count clears 1 + A(2, eps, delta/2). The noise is
// bounded, so |noisy - raw| <= A for every retained cell.
inline NoisyHistogram stable_histogram(const std::vector<CellKey>& keys, const PrivacyParams& pp, Rng& rng) {
    pp.validate();
    if (keys.empty()) throw Error("stable_histogram: empty key list");
    const std::size_t key_len = keys.front().size();
    for (const CellKey& key : keys) {
        if (key.size() != key_len) throw Error("stable_histogram: keys of unequal length");
    }
    const TLapDist noise = tlap_params(2.0, PrivacyParams{pp.eps, pp.delta / 2.0});
    NoisyHistogram hist;
    hist.threshold = 1.0 + noise.bound_a;
    hist.total_points = static_cast<std::int64_t>(keys.size());
    for (const auto& [key, raw] : histogram_raw_counts(keys)) {
        const double noisy = static_cast<double>(raw) + tlap_sample(noise, rng);
        if (noisy >= hist.threshold) hist.cells.emplace(key, noisy);
    }
    return hist;
}

struct ScoredCandidate {
    int id;        // opaque handle; resolved by the caller
    double score;  // integer for subspace candidates, real for NULL
    bool is_null = false;
};

// GAP-MAX with the exact second-largest score. Winner is the argmax of
// max{0, score - score(s2) - 1} + TLap(2, eps, delta); ties go to the lowest
// list index. With a gap above 1 + 2A the exact argmax wins with probability 1.
inline int gap_max(const std::vector<ScoredCandidate>& candidates, const PrivacyParams& pp, Rng& rng) {
    pp.validate();
    std::size_t null_count = 0;
    for (const ScoredCandidate& c : candidates) null_count += c.is_null ? 1 : 0;
    if (null_count != 1) throw MissingNull();
    if (candidates.size() == 1) return candidates.front().id;

    double best = candidates[0].score, second = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double s = candidates[i].score;
        if (s > best) {
            second = best;
            best = s;
        } else if (s > second) {
            second = s;
        }
    }

    const TLapDist noise = tlap_params(2.0, pp);
    double best_objective = -std::numeric_limits<double>::infinity();
    int winner = candidates.front().id;
    for (const ScoredCandidate& c : candidates) {
        const double objective = std::max(0.0, c.score - second - 1.0) + tlap_sample(noise, rng);
        if (objective > best_objective) {
            best_objective = objective;
            winner = c.id;
        }
    }
    return winner;
}

}  // namespace dpss
