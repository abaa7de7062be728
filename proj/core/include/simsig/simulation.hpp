#pragma once

#include "simsig/baselines.hpp"
#include "simsig/rank_index.hpp"
#include "simsig/search.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace simsig {

enum class SignalModel { NoncentralT4, CorrelatedBerkJones, TwoSidedNormal };

enum class Method { ProposedMax, ProposedMin, PowerfulMax, PowerfulMin, MaxP };

std::string method_name(Method method);
std::string model_name(SignalModel model);

/// One synthetic two-study design.
///
/// Feature classes are given as counts: p11 simultaneous signals, p10 and
/// p01 single-study signals, the rest null. Signal positions and effect
/// sizes are drawn once from the scenario seed and held fixed across
/// replications; only the noise changes per replication.
///
/// mean_law_mu is the mean of the N(mu,1) effect-size law for NoncentralT4
/// and CorrelatedBerkJones, and the fixed statistic mean for TwoSidedNormal.
struct ScenarioConfig {
    std::size_t p = 10000;
    std::size_t p10 = 0;
    std::size_t p01 = 0;
    std::size_t p11 = 0;
    SignalModel model = SignalModel::NoncentralT4;
    double mean_law_mu = 6.0;
    double rho = 0.0;          ///< AR(1) correlation of the Berk-Jones z-scores
    std::size_t block = 50;    ///< z-scores per feature (Berk-Jones model)
    std::size_t nonzero = 25;  ///< non-null z-score components per signal
    double alpha = 0.05;
    std::size_t replications = 1000;
    std::uint64_t seed = 1;
    std::size_t m1 = 5000;
    std::size_t m2 = 5000;
    std::vector<Method> methods;  ///< empty = defaults for the model
    std::size_t threads = 0;
    const BjNullTable* bj_table = nullptr;  ///< needed by MaxP on Berk-Jones scenarios
    std::string label;

    void validate() const;
    std::vector<Method> resolved_methods() const;
    std::string resolved_label() const;
};

/// True signal indicators, fixed across replications.
struct SignalTruth {
    std::vector<std::uint8_t> study1;
    std::vector<std::uint8_t> study2;
};

std::uint64_t replication_seed(std::uint64_t scenario_seed, std::size_t replication);

std::pair<PairedStatistics, SignalTruth> generate_t4_scenario(const ScenarioConfig& config,
                                                              std::uint64_t noise_seed);
std::pair<PairedStatistics, SignalTruth> generate_bj_scenario(const ScenarioConfig& config,
                                                              std::uint64_t noise_seed);
std::pair<PairedStatistics, SignalTruth> generate_two_sided_normal_scenario(
    const ScenarioConfig& config, std::uint64_t noise_seed);
std::pair<PairedStatistics, SignalTruth> generate_scenario(const ScenarioConfig& config,
                                                           std::uint64_t noise_seed);

/// Realized per-replication bookkeeping: FDP = (V00+V10+V01)/max(1,R).
struct ReplicationSummary {
    double fdp = 0.0;
    std::size_t discoveries = 0;
    std::size_t true_positives = 0;
};

ReplicationSummary summarize_region(const PairedStatistics& data, const SignalTruth& truth,
                                    const RejectionThresholds& region);
ReplicationSummary summarize_mask(const std::vector<bool>& rejected, const SignalTruth& truth);

struct MethodAggregate {
    Method method = Method::ProposedMax;
    double fdr = 0.0;     ///< mean realized FDP
    double fdr_se = 0.0;  ///< Monte-Carlo standard error of the mean FDP
    double mean_discoveries = 0.0;
    double mean_true_positives = 0.0;
    std::vector<ReplicationSummary> per_replication;
};

struct ScenarioResult {
    ScenarioConfig config;
    std::vector<MethodAggregate> methods;
};

/// Runs all replications of every configured method. Deterministic for a
/// fixed config and seed regardless of thread count.
ScenarioResult run_replications(const ScenarioConfig& config);

/// Closed-form population quantities of a two-sided-normal mixture, the
/// testable side of the asymptotic claims.
struct PopulationLimits {
    double pi10 = 0.0;
    double pi01 = 0.0;
    double pi11 = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;

    double pi1() const { return pi10 + pi11; }
    double pi2() const { return pi01 + pi11; }
    double pi00() const { return 1.0 - pi10 - pi01 - pi11; }
    bool positively_dependent() const { return pi11 > pi1() * pi2(); }

    double null_cdf(double t) const;            ///< uniform on [0,1]
    double alt_cdf(int study, double t) const;  ///< two-sided-normal p-value law
    double marginal(int study, double t) const;
    double joint(double t1, double t2) const;
};

PopulationLimits population_limits(const ScenarioConfig& config);

/// Expected mass of non-simultaneous features in the region (the uncomputable
/// numerator, available here because the alternatives are known).
double oracle_fdr_numerator(const PopulationLimits& limits, double t1, double t2);

/// Pointwise population limit of the conservative estimate,
/// F1(t1)F2(t2)/G(t1,t2). Throws std::domain_error when G is zero.
double fdr_infinity(const PopulationLimits& limits, double t1, double t2);

/// Stationary AR(1) standard-normal noise: corr(z_u, z_v) = rho^|u-v| exactly.
void ar1_normal_fill(std::vector<double>& z, double rho, std::mt19937_64& engine);
std::vector<double> ar1_normal(std::size_t n, double rho, std::mt19937_64& engine);

// distribution helpers (closed forms; shared with the generators and tests)
double student_t4_cdf(double t);
double two_sided_t4_pvalue(double t);
double normal_cdf(double x);
double normal_quantile(double prob);
double two_sided_normal_pvalue(double x);

}  // namespace simsig
