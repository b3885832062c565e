#include <benchmark/benchmark.h>

#include "abach/bachelier.hpp"
#include "abach/pricer.hpp"

using namespace abach;

namespace {

const ModelParams& params() {
    static const ModelParams p(VolCurve::constant(1.0), -0.6, 1.1, Alpha(0.5));
    return p;
}

}  // namespace

static void BM_LewisCallAtm(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(lewis_call_normalized(0.0, params()));
}
BENCHMARK(BM_LewisCallAtm);

static void BM_LewisCallWing(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(lewis_call_normalized(8.0, params()));
}
BENCHMARK(BM_LewisCallWing);

static void BM_MixtureCall(benchmark::State& state) {
    const GQuadrature q = g_quadrature(GDistribution(Alpha(0.5), 1.1), -0.6, 1.5);
    for (auto _ : state)
        benchmark::DoNotOptimize(mixture_call_normalized(1.5, params(), q));
}
BENCHMARK(BM_MixtureCall);

static void BM_BachelierKernel(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(cb(1.5, 0.9));
}
BENCHMARK(BM_BachelierKernel);

static void BM_ImpliedVol(benchmark::State& state) {
    const double price = cb(1.5, 0.9);
    for (auto _ : state) benchmark::DoNotOptimize(implied_vol_normalized(1.5, price));
}
BENCHMARK(BM_ImpliedVol);
