#include <benchmark/benchmark.h>

#include "abach/smile.hpp"

using namespace abach;

static void BM_SmileConstruct(benchmark::State& state) {
    const ModelParams p(VolCurve::constant(1.0), -0.6, 1.1, Alpha(0.5));
    for (auto _ : state) benchmark::DoNotOptimize(SmileFunction(p));
}
BENCHMARK(BM_SmileConstruct);

static void BM_SmileEval(benchmark::State& state) {
    const ModelParams p(VolCurve::constant(1.0), -0.6, 1.1, Alpha(0.5));
    const SmileFunction smile(p);
    double y = -5.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(smile(y));
        y = y >= 5.0 ? -5.0 : y + 0.25;
    }
}
BENCHMARK(BM_SmileEval);

static void BM_AtmExpansion(benchmark::State& state) {
    const ModelParams p(VolCurve::constant(1.0), -0.6, 1.1, Alpha(0.5));
    for (auto _ : state) benchmark::DoNotOptimize(atm_expansion(p));
}
BENCHMARK(BM_AtmExpansion);
