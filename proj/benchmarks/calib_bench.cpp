#include <benchmark/benchmark.h>

#include "abach/calib.hpp"
#include "abach/synth.hpp"

using namespace abach;

namespace {

SynthConfig small_config() {
    SynthConfig cfg;
    cfg.expiry_days = {44, 167, 350};
    cfg.sigma = {15.0, 12.1, 10.6};
    cfg.strike_span = 20.0;
    return cfg;
}

}  // namespace

static void BM_SmileObjective(benchmark::State& state) {
    const SynthMarket m = synth_market(small_config());
    const SmileFitConfig cfg;
    const auto dfs = fit_discount_forward(m.chain, &m.ois);
    const auto atms = fit_atm_vol(m.chain, dfs);
    const auto quotes = prepare_smile_quotes(m.chain, dfs, atms, cfg);
    for (auto _ : state)
        benchmark::DoNotOptimize(smile_objective(quotes, -0.55, 1.2, cfg.alpha));
}
BENCHMARK(BM_SmileObjective);

static void BM_StageOne(benchmark::State& state) {
    const SynthMarket m = synth_market(small_config());
    for (auto _ : state) benchmark::DoNotOptimize(fit_discount_forward(m.chain, &m.ois));
}
BENCHMARK(BM_StageOne);

static void BM_Cascade(benchmark::State& state) {
    const SynthMarket m = synth_market(small_config());
    SmileFitConfig cfg;
    cfg.multistarts = 1;
    for (auto _ : state) benchmark::DoNotOptimize(run_cascade(m.chain, m.ois, cfg));
}
BENCHMARK(BM_Cascade)->Unit(benchmark::kMillisecond);
