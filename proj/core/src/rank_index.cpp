#include "simsig/rank_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace simsig {

namespace {

std::vector<std::uint32_t> ascending_order(const std::vector<double>& values) {
    std::vector<std::uint32_t> order(values.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return values[a] < values[b]; });
    return order;
}

// incl_count[i] = 1 + index of the last entry tied with significance rank i
std::vector<std::uint32_t> inclusive_counts(const std::vector<double>& values,
                                            const std::vector<std::uint32_t>& order,
                                            Direction direction) {
    const std::size_t p = order.size();
    std::vector<std::uint32_t> counts(p);
    auto value_at = [&](std::size_t i) {
        return direction == Direction::SmallIsSignificant ? values[order[i]]
                                                          : values[order[p - 1 - i]];
    };
    std::size_t group_start = 0;
    for (std::size_t i = 0; i < p; ++i) {
        if (i + 1 == p || value_at(i + 1) != value_at(i)) {
            for (std::size_t j = group_start; j <= i; ++j) {
                counts[j] = static_cast<std::uint32_t>(i + 1);
            }
            group_start = i + 1;
        }
    }
    return counts;
}

}  // namespace

RankIndex build_rank_index(const PairedStatistics& data) {
    if (data.size() == 0) {
        throw std::invalid_argument("no features");
    }
    if (data.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument("feature count exceeds index capacity");
    }
    data.validate();

    RankIndex index;
    index.direction = data.direction;
    index.order1 = ascending_order(data.s1);
    index.order2 = ascending_order(data.s2);

    const std::size_t p = data.size();
    std::vector<std::uint32_t> sig_rank1_of_feature(p);
    for (std::size_t i = 0; i < p; ++i) {
        sig_rank1_of_feature[index.sig_feature1(i)] = static_cast<std::uint32_t>(i);
    }
    index.rank_of_2_in_1.resize(p);
    for (std::size_t v = 0; v < p; ++v) {
        index.rank_of_2_in_1[v] = sig_rank1_of_feature[index.sig_feature2(v)];
    }

    index.incl_count1 = inclusive_counts(data.s1, index.order1, data.direction);
    index.incl_count2 = inclusive_counts(data.s2, index.order2, data.direction);
    return index;
}

}  // namespace simsig
