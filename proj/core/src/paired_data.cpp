#include "simsig/paired_data.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace simsig {

void PairedStatistics::validate() const {
    const std::size_t p = s1.size();
    if (p == 0) {
        throw std::invalid_argument("no features");
    }
    if (feature_ids.size() != p || s2.size() != p) {
        throw std::invalid_argument("feature_ids, s1 and s2 must have equal length");
    }
    for (std::size_t j = 0; j < p; ++j) {
        if (!std::isfinite(s1[j]) || !std::isfinite(s2[j])) {
            throw std::invalid_argument("non-finite statistic at feature '" + feature_ids[j] + "'");
        }
        if (pvalue_mode() && (s1[j] < 0.0 || s1[j] > 1.0 || s2[j] < 0.0 || s2[j] > 1.0)) {
            throw std::invalid_argument("p-value outside [0,1] at feature '" + feature_ids[j] + "'");
        }
    }
    std::unordered_set<std::string> seen;
    seen.reserve(p);
    for (const auto& id : feature_ids) {
        if (!seen.insert(id).second) {
            throw std::invalid_argument("duplicate feature id '" + id + "'");
        }
    }
}

namespace {

const std::vector<double>& study_column(const PairedStatistics& data, int study) {
    if (study == 1) return data.s1;
    if (study == 2) return data.s2;
    throw std::invalid_argument("study index must be 1 or 2");
}

}  // namespace

std::size_t marginal_count(const PairedStatistics& data, int study, double t) {
    const auto& s = study_column(data, study);
    std::size_t count = 0;
    for (double x : s) count += inside(x, t, data.direction);
    return count;
}

std::size_t joint_count(const PairedStatistics& data, double t1, double t2) {
    const std::size_t p = data.size();
    std::size_t count = 0;
    for (std::size_t j = 0; j < p; ++j) {
        count += inside(data.s1[j], t1, data.direction) && inside(data.s2[j], t2, data.direction);
    }
    return count;
}

double marginal_ecdf(const PairedStatistics& data, int study, double t) {
    return static_cast<double>(marginal_count(data, study, t)) / static_cast<double>(data.size());
}

double bivariate_ecdf(const PairedStatistics& data, double t1, double t2) {
    return static_cast<double>(joint_count(data, t1, t2)) / static_cast<double>(data.size());
}

}  // namespace simsig
