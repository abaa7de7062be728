#include "simsig/simulation.hpp"

#include "simsig/parallel.hpp"
#include "simsig/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace simsig {

std::string method_name(Method method) {
    switch (method) {
        case Method::ProposedMax: return "proposed-max";
        case Method::ProposedMin: return "proposed-min";
        case Method::PowerfulMax: return "powerful-max";
        case Method::PowerfulMin: return "powerful-min";
        case Method::MaxP: return "maxp";
    }
    return "unknown";
}

std::string model_name(SignalModel model) {
    switch (model) {
        case SignalModel::NoncentralT4: return "t4";
        case SignalModel::CorrelatedBerkJones: return "berk-jones";
        case SignalModel::TwoSidedNormal: return "two-sided-normal";
    }
    return "unknown";
}

void ScenarioConfig::validate() const {
    if (p == 0) throw std::invalid_argument("scenario needs p >= 1");
    if (p10 + p01 + p11 > p) throw std::invalid_argument("signal counts exceed p");
    if (!(alpha > 0.0) || alpha > 1.0) throw std::invalid_argument("alpha must lie in (0, 1]");
    if (replications == 0) throw std::invalid_argument("needs at least one replication");
    if (model == SignalModel::CorrelatedBerkJones) {
        if (!(rho > -1.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (-1, 1)");
        if (nonzero > block) throw std::invalid_argument("nonzero components exceed block size");
        for (Method m : resolved_methods()) {
            if (m == Method::PowerfulMax || m == Method::PowerfulMin) {
                throw std::invalid_argument("the Powerful estimator requires p-values");
            }
            if (m == Method::MaxP && bj_table == nullptr) {
                throw std::invalid_argument(
                    "maxp on Berk-Jones statistics needs a null table; "
                    "build one with the calibrate-bj command");
            }
        }
        if (bj_table != nullptr && bj_table->n != block) {
            throw std::invalid_argument("null table sample size does not match block");
        }
    }
}

std::vector<Method> ScenarioConfig::resolved_methods() const {
    if (!methods.empty()) return methods;
    if (model == SignalModel::CorrelatedBerkJones) {
        std::vector<Method> defaults{Method::ProposedMax, Method::ProposedMin};
        if (bj_table != nullptr) defaults.push_back(Method::MaxP);
        return defaults;
    }
    return {Method::ProposedMax, Method::ProposedMin, Method::PowerfulMax, Method::PowerfulMin,
            Method::MaxP};
}

std::string ScenarioConfig::resolved_label() const {
    if (!label.empty()) return label;
    std::ostringstream out;
    out << model_name(model) << "-" << (p10 + p11) << "-" << (p01 + p11) << "-" << p11;
    if (model == SignalModel::CorrelatedBerkJones) out << "-rho" << rho;
    return out.str();
}

std::uint64_t replication_seed(std::uint64_t scenario_seed, std::size_t replication) {
    return mix64(scenario_seed, 0x4e015eULL, replication);
}

namespace {

constexpr std::uint64_t kFixedStream = 0xf17ed0ULL;

SignalTruth assign_truth(const ScenarioConfig& config) {
    SignalTruth truth;
    truth.study1.assign(config.p, 0);
    truth.study2.assign(config.p, 0);
    std::size_t j = 0;
    for (std::size_t i = 0; i < config.p11; ++i, ++j) {
        truth.study1[j] = 1;
        truth.study2[j] = 1;
    }
    for (std::size_t i = 0; i < config.p10; ++i, ++j) truth.study1[j] = 1;
    for (std::size_t i = 0; i < config.p01; ++i, ++j) truth.study2[j] = 1;
    return truth;
}

std::vector<std::string> feature_labels(std::size_t p) {
    std::vector<std::string> ids(p);
    for (std::size_t j = 0; j < p; ++j) ids[j] = std::to_string(j);
    return ids;
}

}  // namespace

std::pair<PairedStatistics, SignalTruth> generate_t4_scenario(const ScenarioConfig& config,
                                                              std::uint64_t noise_seed) {
    const std::size_t p = config.p;
    SignalTruth truth = assign_truth(config);

    // effect sizes: drawn once from the scenario seed, fixed across replications
    auto fixed = make_engine(config.seed, kFixedStream);
    std::normal_distribution<double> effect_law(config.mean_law_mu, 1.0);
    std::vector<double> mu1(p, 0.0), mu2(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        if (truth.study1[j]) mu1[j] = effect_law(fixed);
    }
    for (std::size_t j = 0; j < p; ++j) {
        if (truth.study2[j]) mu2[j] = effect_law(fixed);
    }

    auto noise = make_engine(noise_seed, 0x714eULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::chi_squared_distribution<double> chi4(4.0);

    PairedStatistics data;
    data.direction = Direction::SmallIsSignificant;
    data.feature_ids = feature_labels(p);
    data.s1.resize(p);
    data.s2.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        const double tstat1 = (normal(noise) + mu1[j]) / std::sqrt(chi4(noise) / 4.0);
        const double tstat2 = (normal(noise) + mu2[j]) / std::sqrt(chi4(noise) / 4.0);
        data.s1[j] = two_sided_t4_pvalue(tstat1);
        data.s2[j] = two_sided_t4_pvalue(tstat2);
    }
    return {std::move(data), std::move(truth)};
}

std::pair<PairedStatistics, SignalTruth> generate_bj_scenario(const ScenarioConfig& config,
                                                              std::uint64_t noise_seed) {
    const std::size_t p = config.p;
    const std::size_t n = config.block;
    SignalTruth truth = assign_truth(config);

    // non-null component positions and values, fixed across replications
    auto fixed = make_engine(config.seed, kFixedStream);
    std::normal_distribution<double> effect_law(config.mean_law_mu, 1.0);
    std::vector<std::vector<double>> mean1(p), mean2(p);
    auto draw_pattern = [&](std::vector<double>& mean) {
        mean.assign(n, 0.0);
        std::vector<std::uint32_t> positions(n);
        std::iota(positions.begin(), positions.end(), 0u);
        std::shuffle(positions.begin(), positions.end(), fixed);
        for (std::size_t i = 0; i < config.nonzero; ++i) {
            mean[positions[i]] = effect_law(fixed);
        }
    };
    for (std::size_t j = 0; j < p; ++j) {
        if (truth.study1[j]) draw_pattern(mean1[j]);
    }
    for (std::size_t j = 0; j < p; ++j) {
        if (truth.study2[j]) draw_pattern(mean2[j]);
    }

    auto noise = make_engine(noise_seed, 0x714eULL);
    std::vector<double> z(n);
    auto draw_statistic = [&](const std::vector<double>* mean) {
        ar1_normal_fill(z, config.rho, noise);
        if (mean != nullptr) {
            for (std::size_t u = 0; u < n; ++u) z[u] += (*mean)[u];
        }
        return berk_jones(z);
    };

    PairedStatistics data;
    data.direction = Direction::LargeIsSignificant;
    data.feature_ids = feature_labels(p);
    data.s1.resize(p);
    data.s2.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        data.s1[j] = draw_statistic(truth.study1[j] ? &mean1[j] : nullptr);
        data.s2[j] = draw_statistic(truth.study2[j] ? &mean2[j] : nullptr);
    }
    return {std::move(data), std::move(truth)};
}

std::pair<PairedStatistics, SignalTruth> generate_two_sided_normal_scenario(
    const ScenarioConfig& config, std::uint64_t noise_seed) {
    const std::size_t p = config.p;
    SignalTruth truth = assign_truth(config);

    auto noise = make_engine(noise_seed, 0x714eULL);
    std::normal_distribution<double> normal(0.0, 1.0);

    PairedStatistics data;
    data.direction = Direction::SmallIsSignificant;
    data.feature_ids = feature_labels(p);
    data.s1.resize(p);
    data.s2.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        const double x1 = normal(noise) + (truth.study1[j] ? config.mean_law_mu : 0.0);
        const double x2 = normal(noise) + (truth.study2[j] ? config.mean_law_mu : 0.0);
        data.s1[j] = two_sided_normal_pvalue(x1);
        data.s2[j] = two_sided_normal_pvalue(x2);
    }
    return {std::move(data), std::move(truth)};
}

std::pair<PairedStatistics, SignalTruth> generate_scenario(const ScenarioConfig& config,
                                                           std::uint64_t noise_seed) {
    switch (config.model) {
        case SignalModel::NoncentralT4: return generate_t4_scenario(config, noise_seed);
        case SignalModel::CorrelatedBerkJones: return generate_bj_scenario(config, noise_seed);
        case SignalModel::TwoSidedNormal:
            return generate_two_sided_normal_scenario(config, noise_seed);
    }
    throw std::logic_error("unknown signal model");
}

ReplicationSummary summarize_region(const PairedStatistics& data, const SignalTruth& truth,
                                    const RejectionThresholds& region) {
    ReplicationSummary s;
    if (region.empty) return s;
    for (std::size_t j = 0; j < data.size(); ++j) {
        if (inside(data.s1[j], region.t1, data.direction) &&
            inside(data.s2[j], region.t2, data.direction)) {
            ++s.discoveries;
            if (truth.study1[j] && truth.study2[j]) ++s.true_positives;
        }
    }
    s.fdp = static_cast<double>(s.discoveries - s.true_positives) /
            std::max<std::size_t>(1, s.discoveries);
    return s;
}

ReplicationSummary summarize_mask(const std::vector<bool>& rejected, const SignalTruth& truth) {
    ReplicationSummary s;
    for (std::size_t j = 0; j < rejected.size(); ++j) {
        if (rejected[j]) {
            ++s.discoveries;
            if (truth.study1[j] && truth.study2[j]) ++s.true_positives;
        }
    }
    s.fdp = static_cast<double>(s.discoveries - s.true_positives) /
            std::max<std::size_t>(1, s.discoveries);
    return s;
}

namespace {

SearchConfig search_config_for(const ScenarioConfig& config, Method method) {
    SearchConfig sc;
    sc.alpha = config.alpha;
    sc.m1 = std::min(config.m1, config.p);
    sc.m2 = std::min(config.m2, config.p);
    sc.threads = 1;  // replications already run in parallel
    switch (method) {
        case Method::ProposedMax:
            sc.tie_rule = TieRule::LargestArea;
            sc.estimator = EstimatorVariant::Standard;
            break;
        case Method::ProposedMin:
            sc.tie_rule = TieRule::SmallestArea;
            sc.estimator = EstimatorVariant::Standard;
            break;
        case Method::PowerfulMax:
            sc.tie_rule = TieRule::LargestArea;
            sc.estimator = EstimatorVariant::Powerful;
            break;
        case Method::PowerfulMin:
            sc.tie_rule = TieRule::SmallestArea;
            sc.estimator = EstimatorVariant::Powerful;
            break;
        case Method::MaxP: break;
    }
    return sc;
}

ReplicationSummary run_maxp(const ScenarioConfig& config, const PairedStatistics& data,
                            const SignalTruth& truth) {
    std::vector<double> combined;
    if (data.pvalue_mode()) {
        combined = max_p_combine(data);
    } else {
        const auto n = static_cast<std::uint32_t>(config.block);
        combined.resize(data.size());
        for (std::size_t j = 0; j < data.size(); ++j) {
            const double p1 = berk_jones_pvalue(data.s1[j], n, *config.bj_table);
            const double p2 = berk_jones_pvalue(data.s2[j], n, *config.bj_table);
            combined[j] = std::max(p1, p2);
        }
    }
    const BhResult bh = benjamini_hochberg(combined, config.alpha);
    return summarize_mask(bh.rejected, truth);
}

}  // namespace

ScenarioResult run_replications(const ScenarioConfig& config) {
    config.validate();
    const std::vector<Method> methods = config.resolved_methods();
    const std::size_t reps = config.replications;

    std::vector<std::vector<ReplicationSummary>> table(methods.size());
    for (auto& column : table) column.resize(reps);

    parallel_for(reps, config.threads, [&](std::size_t r) {
        const auto [data, truth] = generate_scenario(config, replication_seed(config.seed, r));
        RankIndex index;
        bool index_built = false;
        for (std::size_t m = 0; m < methods.size(); ++m) {
            if (methods[m] == Method::MaxP) {
                table[m][r] = run_maxp(config, data, truth);
                continue;
            }
            if (!index_built) {
                index = build_rank_index(data);
                index_built = true;
            }
            const RejectionThresholds region =
                search(data, index, search_config_for(config, methods[m]));
            table[m][r] = summarize_region(data, truth, region);
        }
    });

    ScenarioResult result;
    result.config = config;
    result.methods.resize(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
        MethodAggregate& agg = result.methods[m];
        agg.method = methods[m];
        agg.per_replication = std::move(table[m]);
        double sum_fdp = 0.0, sum_disc = 0.0, sum_tp = 0.0;
        for (const auto& s : agg.per_replication) {
            sum_fdp += s.fdp;
            sum_disc += static_cast<double>(s.discoveries);
            sum_tp += static_cast<double>(s.true_positives);
        }
        const auto n = static_cast<double>(reps);
        agg.fdr = sum_fdp / n;
        agg.mean_discoveries = sum_disc / n;
        agg.mean_true_positives = sum_tp / n;
        double ss = 0.0;
        for (const auto& s : agg.per_replication) {
            ss += (s.fdp - agg.fdr) * (s.fdp - agg.fdr);
        }
        agg.fdr_se = reps > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    }
    return result;
}

// ---------------------------------------------------------------------------
// closed-form population quantities

double PopulationLimits::null_cdf(double t) const { return std::clamp(t, 0.0, 1.0); }

double PopulationLimits::alt_cdf(int study, double t) const {
    if (study != 1 && study != 2) throw std::invalid_argument("study index must be 1 or 2");
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double mu = study == 1 ? mu1 : mu2;
    // P( 2*Phi(-|X|) <= t ) for X ~ N(mu, 1)
    const double z = -normal_quantile(0.5 * t);
    return normal_cdf(mu - z) + normal_cdf(-z - mu);
}

double PopulationLimits::marginal(int study, double t) const {
    const double pik = study == 1 ? pi1() : pi2();
    return (1.0 - pik) * null_cdf(t) + pik * alt_cdf(study, t);
}

double PopulationLimits::joint(double t1, double t2) const {
    const double f0_1 = null_cdf(t1), f0_2 = null_cdf(t2);
    const double f1_1 = alt_cdf(1, t1), f1_2 = alt_cdf(2, t2);
    return pi00() * f0_1 * f0_2 + pi01 * f0_1 * f1_2 + pi10 * f1_1 * f0_2 + pi11 * f1_1 * f1_2;
}

PopulationLimits population_limits(const ScenarioConfig& config) {
    if (config.model != SignalModel::TwoSidedNormal) {
        throw std::invalid_argument("closed-form limits exist for the two-sided-normal model only");
    }
    PopulationLimits limits;
    const auto p = static_cast<double>(config.p);
    limits.pi10 = static_cast<double>(config.p10) / p;
    limits.pi01 = static_cast<double>(config.p01) / p;
    limits.pi11 = static_cast<double>(config.p11) / p;
    limits.mu1 = config.mean_law_mu;
    limits.mu2 = config.mean_law_mu;
    return limits;
}

double oracle_fdr_numerator(const PopulationLimits& limits, double t1, double t2) {
    const double f0_1 = limits.null_cdf(t1), f0_2 = limits.null_cdf(t2);
    return limits.pi00() * f0_1 * f0_2 + limits.pi01 * f0_1 * limits.alt_cdf(2, t2) +
           limits.pi10 * limits.alt_cdf(1, t1) * f0_2;
}

double fdr_infinity(const PopulationLimits& limits, double t1, double t2) {
    const double g = limits.joint(t1, t2);
    if (g <= 0.0) {
        throw std::domain_error("population joint mass is zero; the limit is undefined");
    }
    return limits.marginal(1, t1) * limits.marginal(2, t2) / g;
}

void ar1_normal_fill(std::vector<double>& z, double rho, std::mt19937_64& engine) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double innovation = std::sqrt(1.0 - rho * rho);
    double e = normal(engine);
    if (z.empty()) return;
    z[0] = e;
    for (std::size_t u = 1; u < z.size(); ++u) {
        e = rho * e + innovation * normal(engine);
        z[u] = e;
    }
}

std::vector<double> ar1_normal(std::size_t n, double rho, std::mt19937_64& engine) {
    std::vector<double> z(n);
    ar1_normal_fill(z, rho, engine);
    return z;
}

// ---------------------------------------------------------------------------
// distribution helpers

double student_t4_cdf(double t) {
    // closed form for 4 degrees of freedom
    const double s = t / std::sqrt(4.0 + t * t);
    return 0.5 + 0.25 * s * (3.0 - s * s);
}

double two_sided_t4_pvalue(double t) {
    const double a = std::fabs(t);
    const double root = std::sqrt(4.0 + a * a);
    const double s = a / root;
    const double one_minus_s = 4.0 / (root * (root + a));  // stable 1 - s
    // 2 * (1 - F(|t|)) = (1-s)^2 (s+2) / 2
    return 0.5 * one_minus_s * one_minus_s * (s + 2.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double two_sided_normal_pvalue(double x) { return std::erfc(std::fabs(x) / std::sqrt(2.0)); }

double normal_quantile(double prob) {
    // Wichura's AS 241 (PPND16): double-precision rational approximations.
    if (prob <= 0.0) return -std::numeric_limits<double>::infinity();
    if (prob >= 1.0) return std::numeric_limits<double>::infinity();
    const double q = prob - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) *
                        r +
                    4.5921953931549871457e4) *
                       r +
                   1.3731693765509461125e4) *
                      r +
                  1.9715909503065514427e3) *
                     r +
                 1.3314166789178437745e2) *
                    r +
                3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) *
                        r +
                    2.1213794301586595867e4) *
                       r +
                   5.3941960214247511077e3) *
                      r +
                  6.8718700749205790830e2) *
                     r +
                 4.2313330701600911252e1) *
                    r +
                1.0);
    }
    double r = q < 0.0 ? prob : 1.0 - prob;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) *
                         r +
                     1.27045825245236838258e0) *
                        r +
                    3.64784832476320460504e0) *
                       r +
                   5.76949722146069140550e0) *
                      r +
                  4.63033784615654529590e0) *
                     r +
                 1.42343711074968357734e0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) *
                         r +
                     1.48103976427480074590e-1) *
                        r +
                    6.89767334985100004550e-1) *
                       r +
                   1.67638483018380384940e0) *
                      r +
                  2.05319162663775882187e0) *
                     r +
                 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) *
                         r +
                     2.65321895265761230930e-2) *
                        r +
                    2.96560571828504891230e-1) *
                       r +
                   1.78482653991729133580e0) *
                      r +
                  5.46378491116411436990e0) *
                     r +
                 6.65790464350110377720e0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) *
                         r +
                     7.86869131145613259100e-4) *
                        r +
                    1.48753612908506148525e-2) *
                       r +
                   1.36929880922735805310e-1) *
                      r +
                  5.99832206555887937690e-1) *
                     r +
                 1.0);
    }
    return q < 0.0 ? -value : value;
}

}  // namespace simsig
