#pragma once

#include "simsig/paired_data.hpp"

#include <cstdint>

namespace simsig {

/// Precomputed sort orders and cross-ranks over a PairedStatistics instance.
///
/// The index is the substrate for the incremental threshold search: walking
/// the grid of order statistics, the joint count at (u, v) advances with one
/// array probe per step. "Significance rank" below means position in the
/// most-significant-first ordering of a study (ascending values in p-value
/// mode, descending in statistic mode). Ties keep input order (stable sort)
/// and are always counted together; incl_count maps a significance rank to
/// the inclusive membership count of its threshold value.
///
/// Immutable after construction and safe to share across threads.
struct RankIndex {
    /// Ascending stable-sort permutations of s1 and s2 (feature positions).
    std::vector<std::uint32_t> order1;
    std::vector<std::uint32_t> order2;
    /// Significance rank in study 1 of the feature holding significance rank v in study 2.
    std::vector<std::uint32_t> rank_of_2_in_1;
    /// Inclusive count of features at/inside the threshold given by each significance rank.
    std::vector<std::uint32_t> incl_count1;
    std::vector<std::uint32_t> incl_count2;
    Direction direction = Direction::SmallIsSignificant;

    std::size_t size() const noexcept { return order1.size(); }

    /// Feature position at significance rank i (0-based, most significant first).
    std::uint32_t sig_feature1(std::size_t i) const noexcept {
        return direction == Direction::SmallIsSignificant ? order1[i] : order1[size() - 1 - i];
    }
    std::uint32_t sig_feature2(std::size_t i) const noexcept {
        return direction == Direction::SmallIsSignificant ? order2[i] : order2[size() - 1 - i];
    }
};

/// Builds the rank index. Deterministic for a fixed input; throws
/// std::invalid_argument("no features") on empty data.
RankIndex build_rank_index(const PairedStatistics& data);

}  // namespace simsig
