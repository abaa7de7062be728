#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "simsig/simulation.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace simsig;

namespace {

double t4_density(double x) { return 0.375 * std::pow(1.0 + 0.25 * x * x, -2.5); }

double chi2_4_density(double w) { return 0.25 * w * std::exp(-0.5 * w); }

ScenarioConfig small_t4_scenario(std::size_t p11, std::size_t single, std::size_t p = 10000) {
    ScenarioConfig config;
    config.p = p;
    config.p11 = p11;
    config.p10 = single;
    config.p01 = single;
    config.seed = 99;
    return config;
}

}  // namespace

TEST_SUITE("distributions") {
    TEST_CASE("central t4 cdf against quadrature") {
        for (double t : {0.0, 0.25, 1.0, 2.0, 2.776445105198463, 5.0, 8.0}) {
            const double tail_mass = oracles::simpson(t4_density, 0.0, t, 40000);
            CHECK(std::fabs(student_t4_cdf(t) - (0.5 + tail_mass)) < 1e-10);
            CHECK(std::fabs(two_sided_t4_pvalue(t) - (1.0 - 2.0 * tail_mass)) < 1e-10);
            CHECK(student_t4_cdf(t) + student_t4_cdf(-t) == doctest::Approx(1.0).epsilon(1e-14));
        }
        // textbook 97.5% point of t with 4 degrees of freedom
        CHECK(two_sided_t4_pvalue(2.776445105198463) == doctest::Approx(0.05).epsilon(1e-10));
    }

    TEST_CASE("normal quantile inverts the normal cdf") {
        for (double u = 0.0005; u < 1.0; u += 0.0183) {
            CHECK(normal_cdf(normal_quantile(u)) == doctest::Approx(u).epsilon(1e-12));
        }
        CHECK(std::isinf(normal_quantile(0.0)));
        CHECK(std::isinf(normal_quantile(1.0)));
    }

    TEST_CASE("noncentral t4 rejection probability against quadrature") {
        // P(two-sided p < 0.05 | mu = 6) = P(|T| > c) with c the central cutoff,
        // T = (Z + 6) / sqrt(W/4); integrate over the chi2_4 mixing density
        const double cutoff = 2.776445105198463;
        auto upper = [&](double w) {
            return chi2_4_density(w) * normal_cdf(6.0 - cutoff * std::sqrt(w / 4.0));
        };
        auto lower = [&](double w) {
            return chi2_4_density(w) * normal_cdf(-cutoff * std::sqrt(w / 4.0) - 6.0);
        };
        const double expected =
            oracles::simpson(upper, 0.0, 120.0, 60000) + oracles::simpson(lower, 0.0, 120.0, 60000);
        CHECK(expected == doctest::Approx(0.97).epsilon(0.02));  // the quadrature itself

        std::mt19937_64 engine(12345);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::chi_squared_distribution<double> chi4(4.0);
        const int draws = 400000;
        int hits = 0;
        for (int i = 0; i < draws; ++i) {
            const double t = (normal(engine) + 6.0) / std::sqrt(chi4(engine) / 4.0);
            hits += two_sided_t4_pvalue(t) < 0.05;
        }
        const double observed = static_cast<double>(hits) / draws;
        CHECK(observed == doctest::Approx(expected).epsilon(0.005));
    }

    TEST_CASE("ar1 noise has the advertised correlations") {
        std::mt19937_64 engine(5);
        SUBCASE("independent when rho is zero") {
            const auto z = ar1_normal(1000000, 0.0, engine);
            double lag1 = 0.0;
            for (std::size_t i = 1; i < z.size(); ++i) lag1 += z[i] * z[i - 1];
            lag1 /= static_cast<double>(z.size() - 1);
            CHECK(std::fabs(lag1) < 0.01);
        }
        SUBCASE("rho 0.7 gives 0.7 and 0.49 at lags one and two") {
            const auto z = ar1_normal(1000000, 0.7, engine);
            double lag1 = 0.0, lag2 = 0.0, var = 0.0;
            for (std::size_t i = 2; i < z.size(); ++i) {
                lag1 += z[i] * z[i - 1];
                lag2 += z[i] * z[i - 2];
                var += z[i] * z[i];
            }
            CHECK(lag1 / var == doctest::Approx(0.7).epsilon(0.015));
            CHECK(lag2 / var == doctest::Approx(0.49).epsilon(0.04));
        }
    }
}

TEST_SUITE("generators") {
    TEST_CASE("all-null t4 p-values are marginally uniform") {
        ScenarioConfig config = small_t4_scenario(0, 0);
        const auto [data, truth] = generate_t4_scenario(config, replication_seed(config.seed, 0));
        CHECK(oracles::ks_uniform(data.s1) < 0.02);
        CHECK(oracles::ks_uniform(data.s2) < 0.02);
        CHECK(data.pvalue_mode());
    }

    TEST_CASE("truth assignment matches the scenario counts") {
        ScenarioConfig config = small_t4_scenario(50, 50, 2000);
        const auto [data, truth] = generate_t4_scenario(config, 1);
        std::size_t in1 = 0, in2 = 0, both = 0;
        for (std::size_t j = 0; j < config.p; ++j) {
            in1 += truth.study1[j];
            in2 += truth.study2[j];
            both += truth.study1[j] && truth.study2[j];
        }
        CHECK(in1 == 100);  // the "100,100 signals, 50 simultaneous" layout
        CHECK(in2 == 100);
        CHECK(both == 50);
    }

    TEST_CASE("fixed quantities persist across replications") {
        ScenarioConfig config = small_t4_scenario(20, 10, 500);
        const auto [a0, t0] = generate_t4_scenario(config, replication_seed(config.seed, 0));
        const auto [a1, t1] = generate_t4_scenario(config, replication_seed(config.seed, 1));
        CHECK(t0.study1 == t1.study1);
        CHECK(t0.study2 == t1.study2);
        CHECK(a0.s1 != a1.s1);  // noise differs
        // same noise seed reproduces bit-identically
        const auto [a2, t2] = generate_t4_scenario(config, replication_seed(config.seed, 0));
        CHECK(a0.s1 == a2.s1);
        CHECK(a0.s2 == a2.s2);
    }

    TEST_CASE("berk-jones scenario emits statistics with signals stochastically larger") {
        ScenarioConfig config;
        config.p = 400;
        config.p11 = 40;
        config.model = SignalModel::CorrelatedBerkJones;
        config.mean_law_mu = 1.5;
        config.rho = 0.5;
        config.seed = 3;
        const auto [data, truth] = generate_bj_scenario(config, 17);
        CHECK(data.direction == Direction::LargeIsSignificant);
        double signal_mean = 0.0, null_mean = 0.0;
        for (std::size_t j = 0; j < config.p; ++j) {
            (truth.study1[j] ? signal_mean : null_mean) += data.s1[j];
        }
        signal_mean /= 40.0;
        null_mean /= 360.0;
        CHECK(signal_mean > 2.0 * null_mean);
    }

    TEST_CASE("two-sided normal generator matches its closed-form law") {
        ScenarioConfig config;
        config.p = 20000;
        config.p11 = 20000;  // every feature is a simultaneous signal
        config.model = SignalModel::TwoSidedNormal;
        config.mean_law_mu = 3.0;
        config.seed = 8;
        const auto [data, truth] = generate_two_sided_normal_scenario(config, 4);
        PopulationLimits limits = population_limits(config);
        // empirical cdf of signal p-values vs alt_cdf on a grid
        for (double t : {0.001, 0.01, 0.05, 0.2, 0.5}) {
            const double observed = oracles::direct_marginal(data.s1, t, true);
            CHECK(observed == doctest::Approx(limits.alt_cdf(1, t)).epsilon(0.08));
        }
    }
}

TEST_SUITE("population_limits") {
    TEST_CASE("oracle numerator at the full square is the non-simultaneous mass") {
        PopulationLimits limits{0.004, 0.006, 0.002, 9.0, 9.0};
        CHECK(oracle_fdr_numerator(limits, 1.0, 1.0) ==
              doctest::Approx(limits.pi00() + 0.004 + 0.006).epsilon(1e-12));
    }

    TEST_CASE("marginal product dominates the oracle numerator under positive dependence") {
        PopulationLimits limits{0.005, 0.005, 0.005, 9.0, 9.0};
        REQUIRE(limits.positively_dependent());
        for (int i = 1; i <= 50; ++i) {
            for (int j = 1; j <= 50; ++j) {
                const double t1 = static_cast<double>(i) / 50.0;
                const double t2 = static_cast<double>(j) / 50.0;
                const double product = limits.marginal(1, t1) * limits.marginal(2, t2);
                CHECK(product >= oracle_fdr_numerator(limits, t1, t2) - 1e-10);
            }
        }
    }

    TEST_CASE("oracle numerator at a small threshold against an independent normal route") {
        PopulationLimits limits{0.005, 0.005, 0.005, 9.0, 9.0};
        // invert the two-sided p-value by bisection instead of the quantile code
        auto cutoff_for = [](double t) {
            double lo = 0.0, hi = 40.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (two_sided_normal_pvalue(mid) > t ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        };
        const double t = 0.01;
        const double z = cutoff_for(t);
        const double alt = normal_cdf(9.0 - z) + normal_cdf(-z - 9.0);
        const double expected = limits.pi00() * t * t + limits.pi01 * t * alt +
                                limits.pi10 * alt * t;
        CHECK(oracle_fdr_numerator(limits, t, t) == doctest::Approx(expected).epsilon(1e-9));
        CHECK(limits.alt_cdf(1, t) == doctest::Approx(alt).epsilon(1e-9));
    }

    TEST_CASE("fully null mixture has limit one everywhere") {
        PopulationLimits limits{0.0, 0.0, 0.0, 9.0, 9.0};
        for (double t1 : {0.05, 0.3, 0.9}) {
            for (double t2 : {0.01, 0.5, 1.0}) {
                CHECK(fdr_infinity(limits, t1, t2) == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
        CHECK_THROWS_AS(fdr_infinity(limits, 0.0, 0.5), std::domain_error);
    }

    TEST_CASE("limit dominates the oracle ratio under positive dependence") {
        PopulationLimits limits{0.01, 0.02, 0.01, 6.0, 6.0};
        REQUIRE(limits.positively_dependent());
        for (double t1 : {0.02, 0.1, 0.4}) {
            for (double t2 : {0.03, 0.2, 0.8}) {
                const double oracle_ratio =
                    oracle_fdr_numerator(limits, t1, t2) / limits.joint(t1, t2);
                CHECK(fdr_infinity(limits, t1, t2) >= oracle_ratio - 1e-12);
            }
        }
    }

    TEST_CASE("estimate converges to the population limit") {
        ScenarioConfig base;
        base.model = SignalModel::TwoSidedNormal;
        base.mean_law_mu = 6.0;
        base.seed = 21;
        const PopulationLimits limits{0.005, 0.005, 0.005, 6.0, 6.0};
        const double target = fdr_infinity(limits, 0.05, 0.05);
        std::vector<double> median_gap;
        for (std::size_t p : {1000u, 10000u, 100000u}) {
            ScenarioConfig config = base;
            config.p = p;
            config.p10 = p / 200;
            config.p01 = p / 200;
            config.p11 = p / 200;
            std::vector<double> gaps;
            for (std::uint64_t rep = 0; rep < 50; ++rep) {
                const auto [data, truth] =
                    generate_two_sided_normal_scenario(config, replication_seed(21, rep));
                const RankIndex index = build_rank_index(data);
                gaps.push_back(std::fabs(fdr_hat_u(data, index, 0.05, 0.05).value - target));
            }
            std::sort(gaps.begin(), gaps.end());
            median_gap.push_back(gaps[gaps.size() / 2]);
        }
        CHECK(median_gap[1] < median_gap[0]);
        CHECK(median_gap[2] < median_gap[1]);
    }
}

TEST_SUITE("replication_runner") {
    TEST_CASE("identical config and seed give bit-identical aggregates") {
        ScenarioConfig config = small_t4_scenario(10, 10, 1500);
        config.replications = 12;
        config.m1 = config.m2 = 750;
        config.methods = {Method::ProposedMax, Method::PowerfulMax, Method::MaxP};
        config.threads = 1;
        const ScenarioResult a = run_replications(config);
        config.threads = 4;
        const ScenarioResult b = run_replications(config);
        REQUIRE(a.methods.size() == b.methods.size());
        for (std::size_t m = 0; m < a.methods.size(); ++m) {
            CHECK(a.methods[m].fdr == b.methods[m].fdr);
            CHECK(a.methods[m].mean_discoveries == b.methods[m].mean_discoveries);
            CHECK(a.methods[m].fdr_se == b.methods[m].fdr_se);
        }
    }

    TEST_CASE("all-null scenario discovers almost nothing") {
        ScenarioConfig config = small_t4_scenario(0, 0, 2000);
        config.replications = 40;
        config.m1 = config.m2 = 1000;
        config.methods = {Method::ProposedMax};
        const ScenarioResult result = run_replications(config);
        CHECK(result.methods[0].mean_discoveries < 0.5);
    }

    TEST_CASE("maxp on t4 signals has near-zero discoveries and tiny fdr") {
        ScenarioConfig config = small_t4_scenario(50, 50);
        config.replications = 15;
        config.methods = {Method::MaxP};
        const ScenarioResult result = run_replications(config);
        CHECK(result.methods[0].mean_discoveries < 1.0);
        CHECK(result.methods[0].fdr <= 0.05);
    }

    TEST_CASE("proposed method controls fdr on a scaled-down t4 run") {
        ScenarioConfig config = small_t4_scenario(50, 50);
        config.replications = 60;
        config.methods = {Method::ProposedMax};
        const ScenarioResult result = run_replications(config);
        CHECK(result.methods[0].fdr <= 0.08);
        CHECK(result.methods[0].mean_discoveries > 5.0);
    }

    TEST_CASE("estimate dominates the realized fdp over a threshold grid") {
        ScenarioConfig config = small_t4_scenario(250, 250, 100000);
        config.seed = 31;
        double mean_min_gap = 0.0;
        const int reps = 8;
        for (int rep = 0; rep < reps; ++rep) {
            const auto [data, truth] =
                generate_t4_scenario(config, replication_seed(config.seed, rep));
            const RankIndex index = build_rank_index(data);
            double min_gap = 1e9;
            for (double t1 : {0.05, 0.1, 0.2, 0.4, 0.8}) {
                for (double t2 : {0.05, 0.1, 0.2, 0.4, 0.8}) {
                    std::size_t discoveries = 0, false_discoveries = 0;
                    for (std::size_t j = 0; j < data.size(); ++j) {
                        if (data.s1[j] <= t1 && data.s2[j] <= t2) {
                            ++discoveries;
                            false_discoveries += !(truth.study1[j] && truth.study2[j]);
                        }
                    }
                    const double fdp = static_cast<double>(false_discoveries) /
                                       std::max<std::size_t>(1, discoveries);
                    min_gap = std::min(min_gap, fdr_hat_u(data, index, t1, t2).value - fdp);
                }
            }
            mean_min_gap += min_gap;
        }
        CHECK(mean_min_gap / reps >= -0.01);
    }

    TEST_CASE("twice the covariance stays below the simultaneous fraction") {
        ScenarioConfig config = small_t4_scenario(50, 50);
        for (std::uint64_t rep = 0; rep < 20; ++rep) {
            const auto [data, truth] =
                generate_t4_scenario(config, replication_seed(config.seed, rep));
            const double pi11 = 50.0 / static_cast<double>(config.p);
            CHECK(2.0 * sigma12_hat(data) <= pi11 + 0.02);
        }
    }

    TEST_CASE("config validation") {
        ScenarioConfig config = small_t4_scenario(10, 10, 15);
        CHECK_THROWS_AS(config.validate(), std::invalid_argument);  // counts exceed p
        ScenarioConfig bj;
        bj.model = SignalModel::CorrelatedBerkJones;
        bj.rho = 1.0;
        CHECK_THROWS_AS(bj.validate(), std::invalid_argument);
        bj.rho = 0.5;
        bj.methods = {Method::PowerfulMax};
        CHECK_THROWS_AS(bj.validate(), std::invalid_argument);
        bj.methods = {Method::MaxP};
        CHECK_THROWS_WITH_AS(bj.validate(), doctest::Contains("calibrate-bj"),
                             std::invalid_argument);
    }
}
