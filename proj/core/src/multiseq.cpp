#include "simsig/multiseq.hpp"

#include "simsig/rank_index.hpp"
#include "simsig/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace simsig {

namespace {

using Thresholds = std::vector<std::optional<double>>;

struct PooledCounts {
    std::vector<std::uint64_t> marginal;                 // per study, 0 when disengaged
    std::vector<std::vector<std::uint64_t>> pair_joint;  // symmetric, diagonal unused
};

// value of the pooled estimate: sum over ordered pairs of marginal products,
// over p times the ordered joint sum
double pooled_value(const PooledCounts& counts, std::uint64_t p) {
    double sum = 0.0, sum_sq = 0.0;
    std::uint64_t joint = 0;
    const std::size_t k = counts.marginal.size();
    for (std::size_t a = 0; a < k; ++a) {
        const auto na = static_cast<double>(counts.marginal[a]);
        sum += na;
        sum_sq += na * na;
        for (std::size_t b = a + 1; b < k; ++b) joint += counts.pair_joint[a][b];
    }
    const double numerator = sum * sum - sum_sq;  // ordered pairs
    const auto denominator = static_cast<double>(p) * 2.0 * static_cast<double>(joint);
    if (joint == 0) return 0.0;
    return numerator / denominator;
}

std::uint64_t pooled_joint(const PooledCounts& counts) {
    std::uint64_t joint = 0;
    const std::size_t k = counts.marginal.size();
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) joint += counts.pair_joint[a][b];
    }
    return joint;
}

PooledCounts count_all(const std::vector<StudySeries>& studies, const Thresholds& thresholds) {
    const std::size_t k = studies.size();
    const std::size_t p = studies[0].pvalues.size();
    PooledCounts counts;
    counts.marginal.assign(k, 0);
    counts.pair_joint.assign(k, std::vector<std::uint64_t>(k, 0));
    std::vector<std::vector<std::uint8_t>> member(k, std::vector<std::uint8_t>(p, 0));
    for (std::size_t a = 0; a < k; ++a) {
        if (!thresholds[a]) continue;
        for (std::size_t j = 0; j < p; ++j) {
            member[a][j] = studies[a].pvalues[j] <= *thresholds[a];
            counts.marginal[a] += member[a][j];
        }
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            std::uint64_t joint = 0;
            for (std::size_t j = 0; j < p; ++j) joint += member[a][j] & member[b][j];
            counts.pair_joint[a][b] = counts.pair_joint[b][a] = joint;
        }
    }
    return counts;
}

void validate_input(const std::vector<StudySeries>& studies) {
    if (studies.size() < 2) {
        throw std::invalid_argument("multiseq needs at least two studies");
    }
    const auto& ids = studies[0].feature_ids;
    if (ids.empty()) {
        throw std::invalid_argument("no features");
    }
    for (const auto& study : studies) {
        if (study.pvalues.size() != study.feature_ids.size()) {
            throw std::invalid_argument("feature_ids and pvalues must have equal length");
        }
        if (study.feature_ids != ids) {
            throw std::invalid_argument("studies are not aligned on the same feature ids");
        }
        for (double v : study.pvalues) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument("p-value outside [0,1]");
            }
        }
    }
}

PairedStatistics pair_data(const std::vector<StudySeries>& studies, std::size_t a, std::size_t b) {
    PairedStatistics data;
    data.feature_ids = studies[0].feature_ids;
    data.s1 = studies[a].pvalues;
    data.s2 = studies[b].pvalues;
    data.direction = Direction::SmallIsSignificant;
    return data;
}

// Optimizes study k's threshold with the others held fixed; returns true when
// the pooled objective strictly improved. Candidates are the sentinel plus
// the distinct order statistics of study k, swept ascending with incremental
// counts.
bool coordinate_step(const std::vector<StudySeries>& studies, std::size_t k, double alpha,
                     Thresholds& thresholds, PooledCounts& counts,
                     const std::vector<std::uint32_t>& order_k) {
    const std::size_t nstudies = studies.size();
    const std::size_t p = studies[0].pvalues.size();
    const auto& pk = studies[k].pvalues;

    // pooled pieces that do not involve study k
    double rest_sum = 0.0, rest_sum_sq = 0.0;
    std::uint64_t rest_joint = 0;
    for (std::size_t a = 0; a < nstudies; ++a) {
        if (a == k) continue;
        const auto na = static_cast<double>(counts.marginal[a]);
        rest_sum += na;
        rest_sum_sq += na * na;
        for (std::size_t b = a + 1; b < nstudies; ++b) {
            if (b == k) continue;
            rest_joint += counts.pair_joint[a][b];
        }
    }

    std::vector<std::uint8_t> other_member(nstudies * p, 0);
    for (std::size_t a = 0; a < nstudies; ++a) {
        if (a == k || !thresholds[a]) continue;
        for (std::size_t j = 0; j < p; ++j) {
            other_member[a * p + j] = studies[a].pvalues[j] <= *thresholds[a];
        }
    }

    struct Choice {
        std::uint64_t objective;  // pooled unordered joint count
        bool engaged = false;
        double threshold = 0.0;
        std::uint64_t nk = 0;
        std::vector<std::uint64_t> joint_k;
    };
    // sentinel: study k rejects nothing
    Choice best{rest_joint, false, 0.0, 0, std::vector<std::uint64_t>(nstudies, 0)};
    const std::uint64_t current_objective = pooled_joint(counts);

    std::uint64_t nk = 0;
    std::vector<std::uint64_t> joint_k(nstudies, 0);
    for (std::size_t i = 0; i < p; ++i) {
        const std::uint32_t j = order_k[i];
        ++nk;
        for (std::size_t a = 0; a < nstudies; ++a) {
            if (a != k) joint_k[a] += other_member[a * p + j];
        }
        if (i + 1 < p && pk[order_k[i + 1]] == pk[j]) continue;  // interior of a tie group

        const std::uint64_t joint_with_k = std::accumulate(joint_k.begin(), joint_k.end(), 0ull);
        const std::uint64_t objective = rest_joint + joint_with_k;
        if (objective <= best.objective) continue;

        const double nk_d = static_cast<double>(nk);
        const double sum = rest_sum + nk_d;
        const double numerator = sum * sum - (rest_sum_sq + nk_d * nk_d);
        const double value =
            objective == 0
                ? 0.0
                : numerator / (static_cast<double>(p) * 2.0 * static_cast<double>(objective));
        if (value > alpha) continue;
        best = Choice{objective, true, pk[j], nk, joint_k};
    }

    if (best.objective <= current_objective) return false;  // strict improvement only

    thresholds[k] = best.engaged ? std::optional<double>(best.threshold) : std::nullopt;
    counts.marginal[k] = best.nk;
    for (std::size_t a = 0; a < nstudies; ++a) {
        if (a == k) continue;
        counts.pair_joint[k][a] = counts.pair_joint[a][k] = best.joint_k[a];
    }
    return true;
}

}  // namespace

MultiseqResult multiseq_search(const std::vector<StudySeries>& studies, double alpha,
                               MultiseqStrategy strategy) {
    validate_input(studies);
    if (strategy != MultiseqStrategy::CoordinateAscent) {
        throw std::invalid_argument("unknown multiseq strategy");
    }
    if (!(alpha > 0.0) || alpha > 1.0) {
        throw std::invalid_argument("alpha must lie in (0, 1]");
    }
    const std::size_t nstudies = studies.size();
    const std::size_t p = studies[0].pvalues.size();

    // initialize at the pairwise two-study solutions
    SearchConfig pair_config;
    pair_config.alpha = alpha;
    Thresholds thresholds(nstudies);
    struct PairInit {
        std::size_t a, b;
        RejectionThresholds region;
    };
    std::vector<PairInit> pairs;
    for (std::size_t a = 0; a < nstudies; ++a) {
        for (std::size_t b = a + 1; b < nstudies; ++b) {
            const PairedStatistics data = pair_data(studies, a, b);
            const RankIndex index = build_rank_index(data);
            pairs.push_back({a, b, search(data, index, pair_config)});
        }
    }
    auto raise = [](std::optional<double>& t, double v) {
        if (!t || *t < v) t = v;
    };
    for (const auto& pair : pairs) {
        if (pair.region.empty) continue;
        raise(thresholds[pair.a], pair.region.t1);
        raise(thresholds[pair.b], pair.region.t2);
    }

    PooledCounts counts = count_all(studies, thresholds);
    if (pooled_value(counts, p) > alpha) {
        // fall back to the single best pair, feasible by construction
        const PairInit* top = nullptr;
        for (const auto& pair : pairs) {
            if (pair.region.empty) continue;
            if (top == nullptr || pair.region.n_discoveries > top->region.n_discoveries) {
                top = &pair;
            }
        }
        thresholds.assign(nstudies, std::nullopt);
        if (top != nullptr) {
            thresholds[top->a] = top->region.t1;
            thresholds[top->b] = top->region.t2;
        }
        counts = count_all(studies, thresholds);
    }

    std::vector<std::vector<std::uint32_t>> orders(nstudies);
    for (std::size_t a = 0; a < nstudies; ++a) {
        orders[a].resize(p);
        std::iota(orders[a].begin(), orders[a].end(), 0u);
        std::stable_sort(orders[a].begin(), orders[a].end(), [&](std::uint32_t x, std::uint32_t y) {
            return studies[a].pvalues[x] < studies[a].pvalues[y];
        });
    }

    MultiseqResult result;
    bool moved = true;
    while (moved) {
        moved = false;
        for (std::size_t k = 0; k < nstudies; ++k) {
            moved |= coordinate_step(studies, k, alpha, thresholds, counts, orders[k]);
        }
        ++result.passes;
    }

    // re-derive everything from the final thresholds
    counts = count_all(studies, thresholds);
    result.thresholds = thresholds;
    result.overall_fdr_estimate = pooled_value(counts, p);
    if (result.overall_fdr_estimate > alpha) {
        throw std::logic_error("multiseq result failed independent re-verification");
    }
    for (std::size_t a = 0; a < nstudies; ++a) {
        for (std::size_t b = a + 1; b < nstudies; ++b) {
            result.pair_discoveries.push_back({a, b, counts.pair_joint[a][b]});
            result.total_discoveries += counts.pair_joint[a][b];
        }
    }
    return result;
}

}  // namespace simsig
