#pragma once

#include "simsig/estimator.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace simsig {

enum class TieRule { LargestArea, SmallestArea };

/// Parameters of the rejection-region search.
///
/// m1/m2 truncate the candidate grid to the m_k most significant order
/// statistics per study; 0 means the default min(p, 100000). alpha may be 1
/// (constraint vacuous). The Powerful estimator requires p-value mode; its
/// covariance correction is computed once before the scan.
struct SearchConfig {
    double alpha = 0.05;
    std::size_t m1 = 0;
    std::size_t m2 = 0;
    TieRule tie_rule = TieRule::LargestArea;
    EstimatorVariant estimator = EstimatorVariant::Standard;
    std::size_t threads = 0;  ///< 0 = hardware concurrency

    void validate(std::size_t p) const;
    std::size_t resolved_m1(std::size_t p) const;
    std::size_t resolved_m2(std::size_t p) const;
};

/// The selected rectangular rejection region.
///
/// empty is the (0,0) sentinel: nothing is rejected; it is reported whenever
/// no candidate region achieves a positive feasible discovery count. For a
/// non-empty region the thresholds are inclusive: a feature is discovered
/// when both of its statistics lie on the significant side of (t1, t2).
/// area is t1*t2 in p-value mode and the product of the two marginal
/// empirical masses in statistic mode. achieved_at_grid holds the inclusive
/// ranks (u, v) of the thresholds, (0, 0) for the sentinel.
struct RejectionThresholds {
    bool empty = true;
    double t1 = 0.0;
    double t2 = 0.0;
    std::size_t n_discoveries = 0;
    double fdr_estimate = 0.0;
    double area = 0.0;
    std::pair<std::uint32_t, std::uint32_t> achieved_at_grid{0, 0};
};

/// Finds the feasible region with the most discoveries over the truncated
/// candidate grid, breaking ties by the configured area rule and then by the
/// lexicographically smallest grid position. The returned region is re-checked
/// post hoc against the direct-count estimator.
RejectionThresholds search(const PairedStatistics& data, const RankIndex& index,
                           const SearchConfig& config);

/// Verification oracle: same contract as search with m1 = m2 = p, evaluating
/// every distinct grid point by direct counting with no incremental updates.
/// Guarded to p <= 2000.
RejectionThresholds brute_force_search(const PairedStatistics& data, const SearchConfig& config);

/// All grid points achieving the maximal feasible discovery count, in grid
/// order. Returns the sentinel alone when that count is 0.
std::vector<RejectionThresholds> enumerate_tie_set(const PairedStatistics& data,
                                                   const SearchConfig& config);

}  // namespace simsig
