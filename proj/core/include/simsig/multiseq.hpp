#pragma once

#include "simsig/paired_data.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace simsig {

/// One study's aligned p-value column for the K-study extension.
struct StudySeries {
    std::vector<std::string> feature_ids;
    std::vector<double> pvalues;
};

enum class MultiseqStrategy { CoordinateAscent };

/// Per-study thresholds controlling the overall FDR across all study pairs.
///
/// A disengaged threshold (nullopt) is the per-study empty sentinel: that
/// study rejects nothing. overall_fdr_estimate is the pooled ratio
/// sum_{k1 != k2} F_k1 F_k2 / sum_{k1 != k2} G_k1k2 over ordered pairs
/// (0 when the pooled joint count is 0).
struct MultiseqResult {
    std::vector<std::optional<double>> thresholds;
    std::vector<std::array<std::size_t, 3>> pair_discoveries;  ///< {k1, k2, count}, k1 < k2
    double overall_fdr_estimate = 0.0;
    std::size_t total_discoveries = 0;  ///< sum of unordered pair counts
    std::size_t passes = 0;             ///< coordinate-ascent sweeps until convergence
};

/// Cyclic coordinate ascent over per-study threshold grids, initialized at
/// the pairwise two-study solutions, maximizing the pooled discovery count
/// subject to the overall estimate staying at or below alpha. The objective
/// never decreases across iterations and the final constraint is re-verified
/// from scratch. For K = 2 this reduces exactly to the two-study search.
MultiseqResult multiseq_search(const std::vector<StudySeries>& studies, double alpha,
                               MultiseqStrategy strategy = MultiseqStrategy::CoordinateAscent);

}  // namespace simsig
