#pragma once

#include "simsig/paired_data.hpp"
#include "simsig/rank_index.hpp"

#include <algorithm>
#include <cstdint>

namespace simsig {

enum class EstimatorVariant { Standard, Powerful };

/// One evaluation of the conservative FDR estimate at a candidate region.
///
/// value is 0 exactly when the denominator (the joint empirical mass) is 0;
/// otherwise value = numerator / denominator, floored at 0. The estimate is
/// deliberately not capped at 1: values above 1 are meaningful to the search.
///
/// The Powerful variant subtracts the covariance correction 2*sigma12*t1*t2
/// from the numerator: the correction is a lower bound on the simultaneous-
/// signal mass inside the region, which under uniform nulls scales with the
/// region's area t1*t2. Subtracting the unscaled covariance instead would
/// zero the numerator at every small region and forfeit error control.
struct FdrEstimate {
    double value = 0.0;
    double numerator = 0.0;    ///< F1_hat * F2_hat, minus the Powerful correction (floored at 0)
    double denominator = 0.0;  ///< G_hat
    EstimatorVariant variant = EstimatorVariant::Standard;
};

/// Conservative FDR estimate F1_hat(t1) * F2_hat(t2) / G_hat(t1, t2).
FdrEstimate fdr_hat_u(const PairedStatistics& data, const RankIndex& index, double t1, double t2);

/// Empirical cross covariance of the two p-value sequences,
///   (p-1)^-1 sum s1*s2  -  (p-1)^-2 (sum s1)(sum s2).
/// Requires p >= 2 and p-value mode.
double sigma12_hat(const PairedStatistics& data);

/// Less conservative variant: numerator reduced by 2*sigma12*t1*t2, floored at 0.
FdrEstimate fdr_hat_powerful(const PairedStatistics& data, const RankIndex& index,
                             double t1, double t2, double sigma12);

namespace detail {

// Count-space arithmetic shared by the estimator, the incremental search and
// the brute-force oracle, so that all three agree bit-for-bit on feasibility.
// Counts up to ~2^26 keep every product below 2^53, hence exact in double.

inline double scaled_two_sigma(std::uint64_t p, double sigma12) {
    return 2.0 * sigma12 * static_cast<double>(p) * static_cast<double>(p);
}

// the Powerful numerator shift at one grid point, in count space: every call
// site forms it as two_sigma_p2 * (t1 * t2) so the rounding agrees everywhere
inline double powerful_shift(double two_sigma_p2, double t1, double t2) {
    return two_sigma_p2 * (t1 * t2);
}

// numerator * p^2; shift = powerful_shift(...), or 0 for Standard
inline double scaled_numerator(std::uint64_t n1, std::uint64_t n2, double shift) {
    double num = static_cast<double>(n1) * static_cast<double>(n2);
    if (shift != 0.0) num = std::max(0.0, num - shift);
    return num;
}

inline double estimate_value(std::uint64_t n1, std::uint64_t n2, std::uint64_t joint,
                             std::uint64_t p, double shift) {
    if (joint == 0) return 0.0;
    return scaled_numerator(n1, n2, shift) /
           (static_cast<double>(p) * static_cast<double>(joint));
}

FdrEstimate make_estimate(std::uint64_t n1, std::uint64_t n2, std::uint64_t joint,
                          std::uint64_t p, double shift, EstimatorVariant variant);

}  // namespace detail

}  // namespace simsig
