#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "stdd/dynamics.hpp"
#include "stdd/threshold.hpp"

using namespace stdd;

namespace {

std::vector<double> random_conf(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> c(n);
    for (auto& x : c) x = u(rng);
    return c;
}

}  // namespace

static void BM_NeighbourThreshold(benchmark::State& state) {
    const auto conf = random_conf(320, 1);
    const auto w = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        double acc = 0.0;
        for (Position p = 64; p < conf.size(); ++p) {
            acc += threshold::neighbour_threshold(conf, p, w, 64, threshold::BoundaryMode::HardCases);
        }
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_NeighbourThreshold)->Arg(1)->Arg(3)->Arg(8);

static void BM_BaseThreshold(benchmark::State& state) {
    const auto prev = random_conf(8, 2);
    const auto w = static_cast<std::size_t>(state.range(0));
    double c = 0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(threshold::base_threshold(prev, c, w, 0.95));
        c += 1e-9;
    }
}
BENCHMARK(BM_BaseThreshold)->Arg(3)->Arg(5);

static void BM_NeighborWeights(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(dynamics::neighbor_weights(static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_NeighborWeights)->Arg(3)->Arg(16);
