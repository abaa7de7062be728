#include "simsig/baselines.hpp"

#include "simsig/parallel.hpp"
#include "simsig/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace simsig {

BhResult benjamini_hochberg(const std::vector<double>& pvalues, double alpha) {
    const std::size_t n = pvalues.size();
    if (n == 0) {
        throw std::invalid_argument("no p-values");
    }
    for (double p : pvalues) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("p-value outside [0,1]");
        }
    }
    std::vector<double> sorted(pvalues);
    std::sort(sorted.begin(), sorted.end());

    BhResult result;
    for (std::size_t i = 1; i <= n; ++i) {
        if (sorted[i - 1] <= alpha * static_cast<double>(i) / static_cast<double>(n)) {
            result.k_star = i;
        }
    }
    result.threshold = result.k_star > 0 ? sorted[result.k_star - 1] : 0.0;
    result.rejected.resize(n);
    if (result.k_star > 0) {
        for (std::size_t j = 0; j < n; ++j) {
            result.rejected[j] = pvalues[j] <= result.threshold;
        }
    }
    return result;
}

std::vector<double> max_p_combine(const PairedStatistics& data) {
    if (!data.pvalue_mode()) {
        throw std::invalid_argument("max_p_combine requires p-values");
    }
    std::vector<double> combined(data.size());
    for (std::size_t j = 0; j < data.size(); ++j) {
        combined[j] = std::max(data.s1[j], data.s2[j]);
    }
    return combined;
}

double chi_squared_1_cdf(double x) {
    if (x <= 0.0) return 0.0;
    return std::erf(std::sqrt(0.5 * x));
}

namespace {

double bernoulli_kl(double a, double b) {
    // KL( Bernoulli(a) || Bernoulli(b) ), with the 0*log(0)=0 convention.
    // b is clamped away from {0,1} so degenerate reference values stay finite.
    b = std::clamp(b, 1e-300, 1.0 - 1e-16);
    double kl = 0.0;
    if (a > 0.0) kl += a * std::log(a / b);
    if (a < 1.0) kl += (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
    return kl;
}

}  // namespace

double berk_jones(std::span<const double> z_scores, const std::function<double(double)>& null_cdf) {
    const std::size_t n = z_scores.size();
    if (n == 0) {
        throw std::invalid_argument("berk_jones requires a nonempty sample");
    }
    std::vector<double> squared(n);
    for (std::size_t i = 0; i < n; ++i) squared[i] = z_scores[i] * z_scores[i];
    std::sort(squared.begin(), squared.end());

    double sup = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 1; i <= n; ++i) {
        const double f0 = null_cdf(squared[i - 1]);
        const double at = bernoulli_kl(static_cast<double>(i) * inv_n, f0);
        const double before = bernoulli_kl(static_cast<double>(i - 1) * inv_n, f0);
        sup = std::max({sup, at, before});
    }
    return sup;
}

double berk_jones(std::span<const double> z_scores) {
    return berk_jones(z_scores, chi_squared_1_cdf);
}

void BjNullTable::save(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) {
        throw std::runtime_error("cannot write null table '" + file.string() + "'");
    }
    out << "simsig-bj-null 1\n";
    out << "n=" << n << " draws=" << draws << " seed=" << seed << "\n";
    char buf[64];
    for (double s : sorted_stats) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", s);
        out << buf;
    }
    if (!out) {
        throw std::runtime_error("failed writing null table '" + file.string() + "'");
    }
}

BjNullTable BjNullTable::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw std::runtime_error("missing Berk-Jones null table '" + file.string() +
                                 "'; build one with the calibrate-bj command");
    }
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "simsig-bj-null" || version != 1) {
        throw std::runtime_error("unrecognized null table format in '" + file.string() + "'");
    }
    BjNullTable table;
    std::string field;
    for (int i = 0; i < 3; ++i) {
        in >> field;
        const auto eq = field.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("malformed null table header in '" + file.string() + "'");
        }
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "n") {
            table.n = static_cast<std::uint32_t>(std::stoul(value));
        } else if (key == "draws") {
            table.draws = static_cast<std::uint32_t>(std::stoul(value));
        } else if (key == "seed") {
            table.seed = std::stoull(value);
        }
    }
    table.sorted_stats.reserve(table.draws);
    double s = 0.0;
    while (in >> s) table.sorted_stats.push_back(s);
    if (table.sorted_stats.size() != table.draws || table.n == 0) {
        throw std::runtime_error("truncated null table '" + file.string() +
                                 "'; rebuild it with the calibrate-bj command");
    }
    return table;
}

BjNullTable calibrate_bj_null(std::uint32_t n, std::uint32_t draws, std::uint64_t seed,
                              std::size_t threads) {
    if (n == 0 || draws == 0) {
        throw std::invalid_argument("calibration needs n >= 1 and draws >= 1");
    }
    BjNullTable table;
    table.n = n;
    table.draws = draws;
    table.seed = seed;
    table.sorted_stats.resize(draws);
    parallel_for(draws, threads, [&](std::size_t i) {
        auto engine = make_engine(seed, 0xb1u, i);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> z(n);
        for (auto& zi : z) zi = normal(engine);
        table.sorted_stats[i] = berk_jones(z);
    });
    std::sort(table.sorted_stats.begin(), table.sorted_stats.end());
    return table;
}

double berk_jones_pvalue(double stat, std::uint32_t n, const BjNullTable& table) {
    if (table.n != n) {
        std::ostringstream msg;
        msg << "null table was calibrated for n=" << table.n << ", need n=" << n
            << "; build one with the calibrate-bj command";
        throw std::invalid_argument(msg.str());
    }
    const auto& stats = table.sorted_stats;
    const auto first_ge = std::lower_bound(stats.begin(), stats.end(), stat);
    const auto r = static_cast<double>(stats.end() - first_ge);
    return (r + 1.0) / (static_cast<double>(table.draws) + 1.0);
}

}  // namespace simsig
