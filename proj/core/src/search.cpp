#include "simsig/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace simsig {

void SearchConfig::validate(std::size_t p) const {
    if (!(alpha > 0.0) || alpha > 1.0) {
        throw std::invalid_argument("alpha must lie in (0, 1]");
    }
    if (m1 > p || m2 > p) {
        throw std::invalid_argument("truncation depth exceeds feature count");
    }
}

namespace {

constexpr std::size_t kDefaultTruncation = 100000;

std::size_t resolve_m(std::size_t m, std::size_t p) {
    return m == 0 ? std::min(p, kDefaultTruncation) : m;
}

}  // namespace

std::size_t SearchConfig::resolved_m1(std::size_t p) const { return resolve_m(m1, p); }
std::size_t SearchConfig::resolved_m2(std::size_t p) const { return resolve_m(m2, p); }

namespace {

struct Candidate {
    std::uint64_t gc = 0;   // joint count; 0 = empty sentinel
    std::uint32_t n1 = 0;   // inclusive rank of t1
    std::uint32_t n2 = 0;
    double area_key = 0.0;  // tie-break key, mode-specific
};

bool better(const Candidate& a, const Candidate& b, TieRule rule) {
    if (a.gc != b.gc) return a.gc > b.gc;
    if (a.area_key != b.area_key) {
        return rule == TieRule::LargestArea ? a.area_key > b.area_key : a.area_key < b.area_key;
    }
    if (a.n1 != b.n1) return a.n1 < b.n1;
    return a.n2 < b.n2;
}

// Scan-time state shared by search, tie enumeration and the brute force.
struct GridScan {
    const PairedStatistics* data = nullptr;
    const RankIndex* index = nullptr;
    std::uint64_t p = 0;
    double alpha = 0.05;
    double two_sigma_p2 = 0.0;
    TieRule tie_rule = TieRule::LargestArea;
    std::size_t row_extent = 0;  // scan limits in significance-rank space
    std::size_t col_extent = 0;

    double threshold1(std::uint32_t n1) const {
        return data->s1[index->sig_feature1(n1 - 1)];
    }
    double threshold2(std::uint32_t n2) const {
        return data->s2[index->sig_feature2(n2 - 1)];
    }
    double area_key(std::uint32_t n1, std::uint32_t n2) const {
        if (data->pvalue_mode()) return threshold1(n1) * threshold2(n2);
        return static_cast<double>(n1) * static_cast<double>(n2);
    }
    double shift_at(std::uint32_t n1, std::uint32_t n2) const {
        if (two_sigma_p2 == 0.0) return 0.0;
        return detail::powerful_shift(two_sigma_p2, threshold1(n1), threshold2(n2));
    }
    bool feasible(std::uint32_t n1, std::uint32_t n2, std::uint64_t gc) const {
        return detail::estimate_value(n1, n2, gc, p, shift_at(n1, n2)) <= alpha;
    }
};

GridScan prepare_scan(const PairedStatistics& data, const RankIndex& index,
                      const SearchConfig& config, double sigma12) {
    const std::size_t p = data.size();
    GridScan scan;
    scan.data = &data;
    scan.index = &index;
    scan.p = p;
    scan.alpha = config.alpha;
    scan.tie_rule = config.tie_rule;
    scan.two_sigma_p2 = config.estimator == EstimatorVariant::Powerful
                            ? detail::scaled_two_sigma(p, sigma12)
                            : 0.0;

    // A tie group straddling the truncation boundary is scanned whole, so the
    // threshold at rank m_k keeps its inclusive count.
    std::size_t m1 = config.resolved_m1(p);
    std::size_t m2 = config.resolved_m2(p);
    std::size_t extent1 = index.incl_count1[m1 - 1];
    std::size_t extent2 = index.incl_count2[m2 - 1];

    // Any feasible candidate satisfies n1*n2 <= alpha*p*gc + shift with
    // shift <= max(0, 2*sigma*p^2) and gc <= min(n1, n2), which bounds both
    // inclusive ranks. The +2 slack absorbs the rounding of the shared
    // estimate arithmetic.
    double count_bound = config.alpha * static_cast<double>(p) + std::max(0.0, scan.two_sigma_p2);
    if (count_bound < static_cast<double>(p)) {
        const auto limit = static_cast<std::size_t>(std::ceil(count_bound)) + 2;
        extent1 = std::min(extent1, limit);
        extent2 = std::min(extent2, limit);
    }
    scan.row_extent = extent1;
    scan.col_extent = extent2;
    return scan;
}

// Walks one row of the grid: fixed study-1 rank u0 (inclusive count n1),
// incrementally counting the joint membership along study-2 significance
// order. Evaluate is called at every distinct candidate column.
template <typename Evaluate>
void scan_row(const GridScan& scan, std::uint32_t n1, Evaluate&& evaluate) {
    const std::uint32_t* cross = scan.index->rank_of_2_in_1.data();
    const std::uint32_t* n2s = scan.index->incl_count2.data();
    const std::size_t cols = scan.col_extent;
    std::uint64_t gc = 0;
    for (std::size_t v = 0; v < cols; ++v) {
        gc += cross[v] < n1;
        const std::uint32_t n2 = n2s[v];
        if (n2 != static_cast<std::uint32_t>(v) + 1) continue;  // interior of a tie group
        evaluate(n2, gc);
    }
}

// Rows are the distinct study-1 thresholds inside the scan extent.
template <typename Row>
void for_each_row(const GridScan& scan, Row&& row) {
    for (std::size_t u = 0; u < scan.row_extent; ++u) {
        const std::uint32_t n1 = scan.index->incl_count1[u];
        if (n1 != static_cast<std::uint32_t>(u) + 1) continue;
        row(n1);
    }
}

Candidate scan_best_rows(const GridScan& scan, std::size_t first_row, std::size_t last_row) {
    Candidate best;
    for (std::size_t u = first_row; u < last_row; ++u) {
        const std::uint32_t n1 = scan.index->incl_count1[u];
        if (n1 != static_cast<std::uint32_t>(u) + 1) continue;
        if (n1 < best.gc) continue;  // gc <= n1, row cannot reach the incumbent
        scan_row(scan, n1, [&](std::uint32_t n2, std::uint64_t gc) {
            if (gc == 0 || gc < best.gc) return;
            if (!scan.feasible(n1, n2, gc)) return;
            Candidate cand{gc, n1, n2, scan.area_key(n1, n2)};
            if (better(cand, best, scan.tie_rule)) best = cand;
        });
    }
    return best;
}

Candidate scan_best(const GridScan& scan, std::size_t threads) {
    if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t rows = scan.row_extent;
    threads = std::min(threads, std::max<std::size_t>(1, rows / 512));
    if (threads <= 1) return scan_best_rows(scan, 0, rows);

    std::vector<Candidate> bests(threads);
    std::vector<std::thread> workers;
    workers.reserve(threads);
    std::atomic<std::size_t> next_block{0};
    constexpr std::size_t kBlock = 64;
    for (std::size_t t = 0; t < threads; ++t) {
        workers.emplace_back([&, t] {
            Candidate local;
            for (;;) {
                const std::size_t begin = next_block.fetch_add(kBlock);
                if (begin >= rows) break;
                const std::size_t end = std::min(rows, begin + kBlock);
                Candidate block = scan_best_rows(scan, begin, end);
                if (better(block, local, scan.tie_rule)) local = block;
            }
            bests[t] = local;
        });
    }
    for (auto& w : workers) w.join();
    // better() is a strict total order on distinct grid points, so the fold
    // is independent of thread scheduling.
    Candidate best;
    for (const auto& b : bests) {
        if (better(b, best, scan.tie_rule)) best = b;
    }
    return best;
}

RejectionThresholds materialize(const GridScan& scan, const Candidate& cand) {
    RejectionThresholds result;
    if (cand.gc == 0) return result;
    result.empty = false;
    result.t1 = scan.threshold1(cand.n1);
    result.t2 = scan.threshold2(cand.n2);
    result.n_discoveries = cand.gc;
    result.fdr_estimate =
        detail::estimate_value(cand.n1, cand.n2, cand.gc, scan.p, scan.shift_at(cand.n1, cand.n2));
    result.achieved_at_grid = {cand.n1, cand.n2};
    if (scan.data->pvalue_mode()) {
        result.area = result.t1 * result.t2;
    } else {
        result.area = (static_cast<double>(cand.n1) / static_cast<double>(scan.p)) *
                      (static_cast<double>(cand.n2) / static_cast<double>(scan.p));
    }
    return result;
}

// Re-derives every count of the selected region straight from the data,
// without the rank index or the incremental loop.
void recheck(const GridScan& scan, const RejectionThresholds& result) {
    if (result.empty) return;
    const PairedStatistics& data = *scan.data;
    const std::uint64_t n1 = marginal_count(data, 1, result.t1);
    const std::uint64_t n2 = marginal_count(data, 2, result.t2);
    const std::uint64_t gc = joint_count(data, result.t1, result.t2);
    const double shift = scan.two_sigma_p2 == 0.0
                             ? 0.0
                             : detail::powerful_shift(scan.two_sigma_p2, result.t1, result.t2);
    const double value = detail::estimate_value(n1, n2, gc, scan.p, shift);
    if (n1 != result.achieved_at_grid.first || n2 != result.achieved_at_grid.second ||
        gc != result.n_discoveries || value != result.fdr_estimate || value > scan.alpha) {
        throw std::logic_error("search result failed independent re-verification");
    }
}

double sigma_for(const PairedStatistics& data, const SearchConfig& config) {
    return config.estimator == EstimatorVariant::Powerful ? sigma12_hat(data) : 0.0;
}

}  // namespace

RejectionThresholds search(const PairedStatistics& data, const RankIndex& index,
                           const SearchConfig& config) {
    if (index.size() != data.size()) {
        throw std::invalid_argument("rank index does not match data");
    }
    config.validate(data.size());
    const GridScan scan = prepare_scan(data, index, config, sigma_for(data, config));
    const Candidate best = scan_best(scan, config.threads);
    RejectionThresholds result = materialize(scan, best);
    recheck(scan, result);
    return result;
}

RejectionThresholds brute_force_search(const PairedStatistics& data, const SearchConfig& config) {
    const std::size_t p = data.size();
    if (p > 2000) {
        throw std::invalid_argument("brute_force_search is limited to 2000 features");
    }
    SearchConfig full = config;
    full.m1 = p;
    full.m2 = p;
    full.validate(p);
    const RankIndex index = build_rank_index(data);

    GridScan scan;
    scan.data = &data;
    scan.index = &index;
    scan.p = p;
    scan.alpha = full.alpha;
    scan.tie_rule = full.tie_rule;
    scan.two_sigma_p2 = full.estimator == EstimatorVariant::Powerful
                            ? detail::scaled_two_sigma(p, sigma_for(data, full))
                            : 0.0;
    scan.row_extent = p;
    scan.col_extent = p;

    Candidate best;
    for_each_row(scan, [&](std::uint32_t n1) {
        const double t1 = scan.threshold1(n1);
        for (std::size_t v = 0; v < p; ++v) {
            const std::uint32_t n2 = index.incl_count2[v];
            if (n2 != static_cast<std::uint32_t>(v) + 1) continue;
            const double t2 = scan.threshold2(n2);
            const std::uint64_t gc = joint_count(data, t1, t2);
            if (gc == 0) continue;
            if (!scan.feasible(n1, n2, gc)) continue;
            Candidate cand{gc, n1, n2, scan.area_key(n1, n2)};
            if (better(cand, best, scan.tie_rule)) best = cand;
        }
    });
    RejectionThresholds result = materialize(scan, best);
    recheck(scan, result);
    return result;
}

std::vector<RejectionThresholds> enumerate_tie_set(const PairedStatistics& data,
                                                   const SearchConfig& config) {
    config.validate(data.size());
    const RankIndex index = build_rank_index(data);
    const GridScan scan = prepare_scan(data, index, config, sigma_for(data, config));
    const Candidate best = scan_best(scan, config.threads);

    std::vector<RejectionThresholds> ties;
    if (best.gc == 0) {
        ties.push_back(RejectionThresholds{});
        return ties;
    }
    for_each_row(scan, [&](std::uint32_t n1) {
        if (n1 < best.gc) return;
        scan_row(scan, n1, [&](std::uint32_t n2, std::uint64_t gc) {
            if (gc != best.gc) return;
            if (!scan.feasible(n1, n2, gc)) return;
            ties.push_back(materialize(scan, Candidate{gc, n1, n2, scan.area_key(n1, n2)}));
        });
    });
    return ties;
}

}  // namespace simsig
