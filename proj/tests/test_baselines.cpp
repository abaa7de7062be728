#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "simsig/baselines.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

using namespace simsig;

TEST_SUITE("benjamini_hochberg") {
    TEST_CASE("all ones reject nothing") {
        const BhResult result = benjamini_hochberg({1.0, 1.0, 1.0}, 0.05);
        CHECK(result.k_star == 0);
        CHECK(std::count(result.rejected.begin(), result.rejected.end(), true) == 0);
    }

    TEST_CASE("single small p-value is rejected") {
        const BhResult result = benjamini_hochberg({0.01}, 0.05);
        CHECK(result.k_star == 1);
        CHECK(result.rejected[0]);
    }

    TEST_CASE("step-up example rejects four") {
        const BhResult result = benjamini_hochberg({0.01, 0.02, 0.03, 0.04, 0.5}, 0.05);
        CHECK(result.k_star == 4);
        CHECK(result.threshold == 0.04);
        CHECK(std::count(result.rejected.begin(), result.rejected.end(), true) == 4);
        CHECK_FALSE(result.rejected[4]);
    }

    TEST_CASE("rejections are exactly the p-values at or below the threshold") {
        std::mt19937_64 engine(1);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> pvalues(60);
            for (auto& p : pvalues) p = uniform(engine) * (trial % 2 ? 1.0 : 0.1);
            const BhResult result = benjamini_hochberg(pvalues, 0.1);
            std::size_t count = 0;
            for (std::size_t j = 0; j < pvalues.size(); ++j) {
                CHECK(result.rejected[j] ==
                      (result.k_star > 0 && pvalues[j] <= result.threshold));
                count += result.rejected[j];
            }
            CHECK(count == result.k_star);
        }
    }

    TEST_CASE("lowering one p-value never decreases the rejection count") {
        std::mt19937_64 engine(2);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> pvalues(40);
            for (auto& p : pvalues) p = uniform(engine);
            const std::size_t before = benjamini_hochberg(pvalues, 0.2).k_star;
            std::uniform_int_distribution<std::size_t> pick(0, pvalues.size() - 1);
            const std::size_t j = pick(engine);
            pvalues[j] *= uniform(engine);
            CHECK(benjamini_hochberg(pvalues, 0.2).k_star >= before);
        }
    }

    TEST_CASE("invalid inputs") {
        CHECK_THROWS_AS(benjamini_hochberg({}, 0.05), std::invalid_argument);
        CHECK_THROWS_AS(benjamini_hochberg({0.5, 1.5}, 0.05), std::invalid_argument);
        CHECK_THROWS_AS(benjamini_hochberg({0.5, std::nan("")}, 0.05), std::invalid_argument);
    }
}

TEST_SUITE("max_p_combine") {
    TEST_CASE("elementwise maximum") {
        auto data = oracles::make_pairs({0.1, 0.3}, {0.2, 0.3});
        const auto combined = max_p_combine(data);
        CHECK(combined == std::vector<double>{0.2, 0.3});
    }

    TEST_CASE("statistic mode is rejected") {
        auto data = oracles::make_pairs({1.0, 2.0}, {3.0, 4.0}, Direction::LargeIsSignificant);
        CHECK_THROWS_AS(max_p_combine(data), std::invalid_argument);
    }
}

TEST_SUITE("chi_squared_1") {
    TEST_CASE("matches quadrature of the density to 1e-12 on [0, 40]") {
        // chi2_1 density: exp(-x/2) / sqrt(2 pi x)
        auto density = [](double x) {
            return std::exp(-0.5 * x) / std::sqrt(2.0 * M_PI * x);
        };
        for (double x : {0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 10.0, 20.0, 40.0}) {
            // substitute x = u^2 to remove the sqrt singularity at 0:
            // integral becomes 2/sqrt(2 pi) * exp(-u^2/2) on [0, sqrt(x)]
            auto transformed = [](double u) {
                return 2.0 / std::sqrt(2.0 * M_PI) * std::exp(-0.5 * u * u);
            };
            const double expected = oracles::simpson(transformed, 0.0, std::sqrt(x), 40000);
            CHECK(std::fabs(chi_squared_1_cdf(x) - expected) < 1e-12);
            (void)density;
        }
        CHECK(chi_squared_1_cdf(0.0) == 0.0);
        CHECK(chi_squared_1_cdf(-1.0) == 0.0);
    }
}

TEST_SUITE("berk_jones") {
    TEST_CASE("single observation at the null median gives log 2") {
        // F_hat jumps 0 -> 1 at the point where F0 = 0.5; both step levels
        // evaluate to log 2
        const double x = 0.454936423119572953;  // chi2_1 median: F0(x) = 0.5
        CHECK(chi_squared_1_cdf(x) == doctest::Approx(0.5).epsilon(1e-12));
        const double z = std::sqrt(x);
        const std::vector<double> sample{z};
        CHECK(berk_jones(sample) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }

    TEST_CASE("null-quantile sample scores below a shifted sample") {
        auto chi1_quantile = [](double u) {
            double lo = 0.0, hi = 60.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (chi_squared_1_cdf(mid) < u ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        };
        const std::size_t n = 50;
        std::vector<double> calm(n), shifted(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (static_cast<double>(i) + 1.0) / (static_cast<double>(n) + 1.0);
            calm[i] = std::sqrt(chi1_quantile(u));  // squared scores match null quantiles
            shifted[i] = calm[i] + 1.5;
        }
        CHECK(berk_jones(calm) < berk_jones(shifted));
    }

    TEST_CASE("nonnegative and permutation invariant") {
        std::mt19937_64 engine(5);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> z(50);
        for (auto& zi : z) zi = normal(engine);
        const double stat = berk_jones(z);
        CHECK(stat >= 0.0);
        std::shuffle(z.begin(), z.end(), engine);
        CHECK(berk_jones(z) == stat);
    }

    TEST_CASE("equals a dense-grid supremum within 1e-9") {
        std::mt19937_64 engine(6);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_int_distribution<std::size_t> size_pick(5, 80);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = size_pick(engine);
            std::vector<double> z(n), squared(n);
            for (std::size_t i = 0; i < n; ++i) {
                z[i] = normal(engine) * (trial % 3 == 0 ? 1.6 : 1.0);
                squared[i] = z[i] * z[i];
            }
            std::sort(squared.begin(), squared.end());
            const double hi = squared.back() + 1.0;

            // dense grid, refined with the sample points and their left
            // neighbours where the step function actually jumps
            std::vector<double> grid_points;
            const std::size_t grid = 100000;
            grid_points.reserve(grid + 2 * n + 1);
            for (std::size_t g = 0; g <= grid; ++g) {
                grid_points.push_back(hi * static_cast<double>(g) / static_cast<double>(grid));
            }
            for (double s : squared) {
                grid_points.push_back(s);
                grid_points.push_back(std::nextafter(s, 0.0));
            }
            double grid_sup = 0.0;
            for (double x : grid_points) {
                const double f0 = std::clamp(chi_squared_1_cdf(x), 1e-300, 1.0 - 1e-16);
                const auto below = std::upper_bound(squared.begin(), squared.end(), x) -
                                   squared.begin();
                const double fhat = static_cast<double>(below) / static_cast<double>(n);
                double term = 0.0;
                if (fhat > 0.0) term += fhat * std::log(fhat / f0);
                if (fhat < 1.0) term += (1.0 - fhat) * std::log((1.0 - fhat) / (1.0 - f0));
                grid_sup = std::max(grid_sup, term);
            }
            const double stat = berk_jones(z);
            CHECK(stat == doctest::Approx(grid_sup).epsilon(1e-9));
        }
    }

    TEST_CASE("empty sample is rejected") {
        CHECK_THROWS_AS(berk_jones(std::vector<double>{}), std::invalid_argument);
    }
}

TEST_SUITE("bj_null_table") {
    TEST_CASE("calibration, smoothing and uniformity") {
        const std::uint32_t n = 20, draws = 10000;
        const BjNullTable table = calibrate_bj_null(n, draws, 42);
        REQUIRE(table.sorted_stats.size() == draws);
        CHECK(std::is_sorted(table.sorted_stats.begin(), table.sorted_stats.end()));

        SUBCASE("tail conventions") {
            CHECK(berk_jones_pvalue(table.sorted_stats.front() - 1.0, n, table) == 1.0);
            CHECK(berk_jones_pvalue(table.sorted_stats.back() + 1.0, n, table) ==
                  doctest::Approx(1.0 / (draws + 1.0)));
            const double median = table.sorted_stats[draws / 2];
            const double p_median = berk_jones_pvalue(median, n, table);
            CHECK(p_median == doctest::Approx(0.5).epsilon(0.04));
        }

        SUBCASE("null p-values are approximately uniform") {
            std::vector<double> pvalues;
            pvalues.reserve(draws);
            std::mt19937_64 engine(7);
            std::normal_distribution<double> normal(0.0, 1.0);
            std::vector<double> z(n);
            for (std::uint32_t i = 0; i < draws; ++i) {
                for (auto& zi : z) zi = normal(engine);
                pvalues.push_back(berk_jones_pvalue(berk_jones(z), n, table));
            }
            CHECK(oracles::ks_uniform(pvalues) < 0.02);
        }

        SUBCASE("round-trips through the table file") {
            const auto path = std::filesystem::temp_directory_path() / "simsig_test_bj_table.tsv";
            table.save(path);
            const BjNullTable loaded = BjNullTable::load(path);
            CHECK(loaded.n == table.n);
            CHECK(loaded.draws == table.draws);
            CHECK(loaded.seed == table.seed);
            CHECK(loaded.sorted_stats == table.sorted_stats);
            std::filesystem::remove(path);
        }

        SUBCASE("wrong sample size is rejected with guidance") {
            CHECK_THROWS_WITH_AS(berk_jones_pvalue(1.0, 50, table),
                                 doctest::Contains("calibrate-bj"), std::invalid_argument);
        }
    }

    TEST_CASE("missing table names the calibration command") {
        CHECK_THROWS_WITH_AS(BjNullTable::load("/nonexistent/simsig_bj.tsv"),
                             doctest::Contains("calibrate-bj"), std::runtime_error);
    }

    TEST_CASE("calibration is thread-count independent") {
        const BjNullTable one = calibrate_bj_null(10, 400, 9, 1);
        const BjNullTable four = calibrate_bj_null(10, 400, 9, 4);
        CHECK(one.sorted_stats == four.sorted_stats);
    }
}
