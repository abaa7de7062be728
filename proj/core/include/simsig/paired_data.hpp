#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace simsig {

/// Orientation of the significant tail of a test statistic.
enum class Direction {
    SmallIsSignificant,  ///< p-value mode: values in [0,1], small means significant
    LargeIsSignificant,  ///< statistic mode: large means significant
};

/// Aligned per-feature statistics observed in two independent studies.
///
/// Invariants (checked by validate()):
///   - feature_ids, s1 and s2 have equal, nonzero length
///   - all statistics are finite; in p-value mode all values lie in [0,1]
///   - feature_ids are unique
struct PairedStatistics {
    std::vector<std::string> feature_ids;
    std::vector<double> s1;
    std::vector<double> s2;
    Direction direction = Direction::SmallIsSignificant;

    std::size_t size() const noexcept { return s1.size(); }
    bool pvalue_mode() const noexcept { return direction == Direction::SmallIsSignificant; }

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const;
};

/// true when x lies on the significant side of threshold t, inclusive.
inline bool inside(double x, double t, Direction d) noexcept {
    return d == Direction::SmallIsSignificant ? x <= t : x >= t;
}

/// Number of study-k statistics on the significant side of t, inclusive. k is 1 or 2.
std::size_t marginal_count(const PairedStatistics& data, int study, double t);

/// Number of features jointly significant at (t1, t2), inclusive on both sides.
std::size_t joint_count(const PairedStatistics& data, double t1, double t2);

/// Empirical marginal distribution mass on the significant side of t. k is 1 or 2.
double marginal_ecdf(const PairedStatistics& data, int study, double t);

/// Empirical bivariate distribution mass of the rectangular region at (t1, t2).
double bivariate_ecdf(const PairedStatistics& data, double t1, double t2);

}  // namespace simsig
