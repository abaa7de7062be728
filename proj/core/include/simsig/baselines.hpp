#pragma once

#include "simsig/paired_data.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace simsig {

/// Outcome of the Benjamini-Hochberg step-up procedure.
struct BhResult {
    std::vector<bool> rejected;  ///< exactly the features with p-value <= threshold
    std::size_t k_star = 0;      ///< largest rejection rank, 0 for none
    double threshold = 0.0;      ///< p-value cutoff, 0 when nothing is rejected
};

BhResult benjamini_hochberg(const std::vector<double>& pvalues, double alpha);

/// Elementwise max(P1j, P2j); requires p-value mode.
std::vector<double> max_p_combine(const PairedStatistics& data);

/// Chi-square CDF with one degree of freedom, via the error function.
double chi_squared_1_cdf(double x);

/// Berk-Jones statistic of the squared z-scores against a reference null CDF:
/// the supremum over x of the Bernoulli Kullback-Leibler divergence between
/// the empirical CDF and null_cdf. The supremum is attained at the sample
/// points or their left limits, so both step levels are evaluated at every
/// order statistic; 0*log(0) counts as 0.
double berk_jones(std::span<const double> z_scores, const std::function<double(double)>& null_cdf);

/// Default null: chi-square with one degree of freedom.
double berk_jones(std::span<const double> z_scores);

/// Monte-Carlo null table for the Berk-Jones statistic under independent
/// standard normal z-scores. Persisted as a versioned text file.
struct BjNullTable {
    std::uint32_t n = 0;       ///< z-scores per statistic
    std::uint32_t draws = 0;   ///< B
    std::uint64_t seed = 0;
    std::vector<double> sorted_stats;  ///< ascending

    void save(const std::filesystem::path& file) const;
    static BjNullTable load(const std::filesystem::path& file);
};

BjNullTable calibrate_bj_null(std::uint32_t n, std::uint32_t draws, std::uint64_t seed,
                              std::size_t threads = 0);

/// Right-tail calibrated p-value with add-one smoothing (r+1)/(B+1).
/// Throws if the table was built for a different sample size.
double berk_jones_pvalue(double stat, std::uint32_t n, const BjNullTable& table);

}  // namespace simsig
