#include <benchmark/benchmark.h>

#include "stdd/strategies.hpp"
#include "stdd/synthetic.hpp"

using namespace stdd;

namespace {

template <class Make>
void run_corpus(benchmark::State& state, Make make) {
    sim::SynthTemplate tmpl;
    tmpl.gen_len = static_cast<std::size_t>(state.range(0));
    tmpl.max_steps = std::max<std::size_t>(64, tmpl.gen_len);
    const auto spec = sim::make_synth_spec(tmpl, 0);
    std::size_t steps = 0;
    for (auto _ : state) {
        sim::SyntheticSource src(spec);
        auto strategy = make();
        const auto r = run(src, strategy, sim::initial_state(spec), {});
        steps += r.steps_used();
        benchmark::DoNotOptimize(r.final_state.masked_count());
    }
    state.counters["steps/run"] = benchmark::Counter(static_cast<double>(steps) / static_cast<double>(state.iterations()));
}

}  // namespace

static void BM_RunStdd(benchmark::State& state) {
    run_corpus(state, [] { return StddStrategy{}; });
}
BENCHMARK(BM_RunStdd)->Arg(64)->Arg(256);

static void BM_RunFixed(benchmark::State& state) {
    run_corpus(state, [] { return FixedThresholdStrategy{}; });
}
BENCHMARK(BM_RunFixed)->Arg(64)->Arg(256);
BENCHMARK_MAIN();
