#include "simsig/baselines.hpp"
#include "simsig/rank_index.hpp"
#include "simsig/search.hpp"
#include "simsig/simulation.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

simsig::PairedStatistics uniform_instance(std::size_t p, std::size_t signals, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    simsig::PairedStatistics data;
    data.feature_ids.resize(p);
    data.s1.resize(p);
    data.s2.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        data.feature_ids[j] = std::to_string(j);
        data.s1[j] = uniform(engine);
        data.s2[j] = uniform(engine);
    }
    for (std::size_t j = 0; j < signals; ++j) {
        data.s1[j] = uniform(engine) * 1e-5;
        data.s2[j] = uniform(engine) * 1e-5;
    }
    return data;
}

void BM_BuildRankIndex(benchmark::State& state) {
    const auto data = uniform_instance(static_cast<std::size_t>(state.range(0)), 50, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(simsig::build_rank_index(data));
    }
}
BENCHMARK(BM_BuildRankIndex)->Arg(10000)->Arg(100000);

void BM_Search(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const auto m = static_cast<std::size_t>(state.range(1));
    const auto data = uniform_instance(p, 50, 7);
    const auto index = simsig::build_rank_index(data);
    simsig::SearchConfig config;
    config.m1 = m;
    config.m2 = m;
    config.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simsig::search(data, index, config));
    }
}
BENCHMARK(BM_Search)->Args({10000, 5000})->Args({100000, 10000})->Unit(benchmark::kMillisecond);

void BM_BerkJones(benchmark::State& state) {
    std::mt19937_64 engine(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(static_cast<std::size_t>(state.range(0)));
    for (auto& zi : z) zi = normal(engine);
    for (auto _ : state) {
        benchmark::DoNotOptimize(simsig::berk_jones(z));
    }
}
BENCHMARK(BM_BerkJones)->Arg(50)->Arg(500);

void BM_GenerateT4(benchmark::State& state) {
    simsig::ScenarioConfig config;
    config.p = static_cast<std::size_t>(state.range(0));
    config.p10 = 50;
    config.p01 = 50;
    config.p11 = 50;
    std::uint64_t rep = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simsig::generate_t4_scenario(config, rep++));
    }
}
BENCHMARK(BM_GenerateT4)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
