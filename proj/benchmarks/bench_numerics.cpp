#include <benchmark/benchmark.h>

#include "cocurve/centering.hpp"
#include "cocurve/numerics.hpp"

namespace {

using namespace cocurve;

void BM_Expm6x6(benchmark::State& state) {
    const ModelParams p = reference_params();
    const Matrix a = p.pi / 365.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(expm(a));
    }
}
BENCHMARK(BM_Expm6x6);

void BM_ClosedFormMoment(benchmark::State& state) {
    const ModelParams p = reference_params();
    const int panels = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            closed_form_moment(Energy::gas, 0.5, 1.0, p, {panels, panels}));
    }
}
BENCHMARK(BM_ClosedFormMoment)->Arg(32)->Arg(64)->Arg(128);

void BM_WienerVariance(benchmark::State& state) {
    const ModelParams p = reference_params();
    for (auto _ : state) {
        benchmark::DoNotOptimize(wiener_variance(Energy::crude, 0.5, 1.0, p));
    }
}
BENCHMARK(BM_WienerVariance);

void BM_BicSubsetSelect(benchmark::State& state) {
    std::srand(7);
    const int n = 1000, p = 6;
    Matrix x(n, p);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) x(i, j) = std::rand() / double(RAND_MAX) - 0.5;
        y[i] = x(i, 0) - 2.0 * x(i, 3) + 0.01 * (std::rand() / double(RAND_MAX) - 0.5);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(bic_subset_select(x, y));
    }
}
BENCHMARK(BM_BicSubsetSelect);

}  // namespace
