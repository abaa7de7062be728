#pragma once

// Test-only reference implementations, kept independent of the library's
// computation paths so they can serve as oracles.

#include "simsig/paired_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace oracles {

// fraction of study values on the significant side of t, by direct counting
inline double direct_marginal(const std::vector<double>& values, double t, bool small_significant) {
    std::size_t count = 0;
    for (double v : values) count += small_significant ? v <= t : v >= t;
    return static_cast<double>(count) / static_cast<double>(values.size());
}

inline double direct_joint(const std::vector<double>& a, const std::vector<double>& b, double t1,
                           double t2, bool small_significant) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const bool in1 = small_significant ? a[j] <= t1 : a[j] >= t1;
        const bool in2 = small_significant ? b[j] <= t2 : b[j] >= t2;
        count += in1 && in2;
    }
    return static_cast<double>(count) / static_cast<double>(a.size());
}

// reference comparison sort for permutation checks
inline std::vector<std::size_t> reference_argsort(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // insertion sort: independent of std::stable_sort, stable by construction
    for (std::size_t i = 1; i < order.size(); ++i) {
        const std::size_t key = order[i];
        std::size_t j = i;
        while (j > 0 && values[order[j - 1]] > values[key]) {
            order[j] = order[j - 1];
            --j;
        }
        order[j] = key;
    }
    return order;
}

inline simsig::PairedStatistics make_pairs(std::vector<double> s1, std::vector<double> s2,
                                           simsig::Direction direction =
                                               simsig::Direction::SmallIsSignificant) {
    simsig::PairedStatistics data;
    data.s1 = std::move(s1);
    data.s2 = std::move(s2);
    data.direction = direction;
    data.feature_ids.resize(data.s1.size());
    for (std::size_t j = 0; j < data.s1.size(); ++j) data.feature_ids[j] = "f" + std::to_string(j);
    return data;
}

// random instance with planted joint signals and optional duplicated values
inline simsig::PairedStatistics random_instance(std::mt19937_64& engine, std::size_t p,
                                                std::size_t signals, bool with_ties = false) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> s1(p), s2(p);
    for (std::size_t j = 0; j < p; ++j) {
        s1[j] = uniform(engine);
        s2[j] = uniform(engine);
    }
    for (std::size_t j = 0; j < std::min(signals, p); ++j) {
        s1[j] = uniform(engine) * 0.01;
        s2[j] = uniform(engine) * 0.01;
    }
    if (with_ties) {
        // duplicate a handful of values on a coarse lattice
        std::uniform_int_distribution<std::size_t> pick(0, p - 1);
        for (std::size_t k = 0; k < p / 4; ++k) {
            s1[pick(engine)] = std::round(uniform(engine) * 20.0) / 20.0;
            s2[pick(engine)] = std::round(uniform(engine) * 20.0) / 20.0;
        }
    }
    return make_pairs(std::move(s1), std::move(s2));
}

// Kolmogorov-Smirnov distance of a sample against the uniform on [0,1]
inline double ks_uniform(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double hi = (static_cast<double>(i) + 1.0) / n - sample[i];
        const double lo = sample[i] - static_cast<double>(i) / n;
        d = std::max({d, hi, lo});
    }
    return d;
}

// adaptive Simpson quadrature, for CDF oracles
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      std::size_t intervals = 20000) {
    if (intervals % 2 == 1) ++intervals;
    const double h = (b - a) / static_cast<double>(intervals);
    double sum = f(a) + f(b);
    for (std::size_t i = 1; i < intervals; ++i) {
        sum += f(a + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

}  // namespace oracles
