#include <benchmark/benchmark.h>

#include "cocurve/simulation.hpp"

namespace {

using namespace cocurve;

std::vector<ForwardCurve> bench_curves() {
    ForwardCurve g, c;
    g.energy = Energy::gas;
    g.maturities = {0.05, 6.0};
    g.prices = {40.0, 40.0};
    c.energy = Energy::crude;
    c.maturities = {0.05, 6.0};
    c.prices = {60.0, 60.0};
    return {g, c};
}

void BM_CounterRngNormals(benchmark::State& state) {
    CounterRng rng{42};
    double z[6];
    std::uint32_t step = 0;
    for (auto _ : state) {
        rng.normals(1, step++, 6, z);
        benchmark::DoNotOptimize(z[5]);
    }
}
BENCHMARK(BM_CounterRngNormals);

void BM_MotionPath(benchmark::State& state) {
    const ModelParams p = reference_params();
    SimConfig cfg;
    cfg.measure = Measure::historical_p;
    cfg.horizon = 1.0;
    cfg.paths = 1;
    std::uint64_t path = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_motion_path(p, cfg, path++));
    }
}
BENCHMARK(BM_MotionPath);

void BM_ForwardPaths(benchmark::State& state) {
    const ModelParams p = reference_params();
    SimConfig cfg;
    cfg.measure = Measure::risk_neutral_q;
    cfg.scheme = Scheme::exponential;
    cfg.horizon = 1.0;
    cfg.paths = static_cast<int>(state.range(0));
    cfg.maturities = {1.5, 2.0, 3.0};
    cfg.threads = 1;
    const auto curves = bench_curves();
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_forwards(p, curves, cfg));
    }
    state.SetItemsProcessed(state.iterations() * cfg.paths);
}
BENCHMARK(BM_ForwardPaths)->Arg(256)->Arg(1024);

}  // namespace
