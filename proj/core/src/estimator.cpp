#include "simsig/estimator.hpp"

#include <stdexcept>

namespace simsig {

namespace detail {

FdrEstimate make_estimate(std::uint64_t n1, std::uint64_t n2, std::uint64_t joint,
                          std::uint64_t p, double shift, EstimatorVariant variant) {
    const double p2 = static_cast<double>(p) * static_cast<double>(p);
    FdrEstimate est;
    est.variant = variant;
    est.numerator = scaled_numerator(n1, n2, shift) / p2;
    est.denominator = static_cast<double>(joint) / static_cast<double>(p);
    est.value = estimate_value(n1, n2, joint, p, shift);
    return est;
}

}  // namespace detail

namespace {

FdrEstimate evaluate(const PairedStatistics& data, const RankIndex& index,
                     double t1, double t2, double shift, EstimatorVariant variant) {
    if (index.size() != data.size()) {
        throw std::invalid_argument("rank index does not match data");
    }
    const std::uint64_t p = data.size();
    const std::uint64_t n1 = marginal_count(data, 1, t1);
    const std::uint64_t n2 = marginal_count(data, 2, t2);
    const std::uint64_t joint = joint_count(data, t1, t2);
    return detail::make_estimate(n1, n2, joint, p, shift, variant);
}

}  // namespace

FdrEstimate fdr_hat_u(const PairedStatistics& data, const RankIndex& index, double t1, double t2) {
    return evaluate(data, index, t1, t2, 0.0, EstimatorVariant::Standard);
}

double sigma12_hat(const PairedStatistics& data) {
    const std::size_t p = data.size();
    if (p < 2) {
        throw std::invalid_argument("sigma12_hat requires at least two features");
    }
    if (!data.pvalue_mode()) {
        throw std::invalid_argument("covariance bound requires p-values");
    }
    double sum_cross = 0.0, sum1 = 0.0, sum2 = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        sum_cross += data.s1[j] * data.s2[j];
        sum1 += data.s1[j];
        sum2 += data.s2[j];
    }
    const double pm1 = static_cast<double>(p - 1);
    return sum_cross / pm1 - sum1 * sum2 / (pm1 * pm1);
}

FdrEstimate fdr_hat_powerful(const PairedStatistics& data, const RankIndex& index,
                             double t1, double t2, double sigma12) {
    if (!data.pvalue_mode()) {
        throw std::invalid_argument("covariance bound requires p-values");
    }
    const double two_sigma_p2 = detail::scaled_two_sigma(data.size(), sigma12);
    const double shift = detail::powerful_shift(two_sigma_p2, t1, t2);
    return evaluate(data, index, t1, t2, shift, EstimatorVariant::Powerful);
}

}  // namespace simsig
