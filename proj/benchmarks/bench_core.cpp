#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "sgbh/deviation.hpp"
#include "sgbh/rng.hpp"
#include "sgbh/solvers.hpp"

namespace {

using namespace sgbh;

SolverContext desk_context(int modes, int points) {
    SolverConfig cfg;
    cfg.n_modes = modes;
    cfg.n_points = points;
    return SolverContext(ModelParams{}, NoiseCoefficient::affine(1.0, 0.5), NoiseSpec(modes, 0.3), cfg);
}

void BM_NormalPair(benchmark::State& state) {
    DrawCoordinates at{42, 0, 0, 0, 0};
    double sink = 0.0;
    for (auto _ : state) {
        const auto [a, b] = normal_pair(at);
        sink += a + b;
        ++at.pair;
    }
    benchmark::DoNotOptimize(sink);
    state.SetItemsProcessed(2 * state.iterations());
}
BENCHMARK(BM_NormalPair);

void BM_ToGrid(benchmark::State& state) {
    const int modes = static_cast<int>(state.range(0));
    const SpectralBasis basis(modes, Grid1D(8 * modes));
    std::vector<double> c(modes, 0.1), samples(basis.n_points());
    for (auto _ : state) {
        basis.to_grid(c, samples);
        benchmark::DoNotOptimize(samples.data());
    }
}
BENCHMARK(BM_ToGrid)->Arg(16)->Arg(32)->Arg(64);

void BM_ToSpectral(benchmark::State& state) {
    const int modes = static_cast<int>(state.range(0));
    const SpectralBasis basis(modes, Grid1D(8 * modes));
    std::vector<double> samples(basis.n_points(), 0.3), c(modes);
    for (auto _ : state) {
        basis.to_spectral(samples, c);
        benchmark::DoNotOptimize(c.data());
    }
}
BENCHMARK(BM_ToSpectral)->Arg(16)->Arg(32)->Arg(64);

// Full-path cost; steps/s is the figure of merit.
void BM_SpdePath(benchmark::State& state) {
    const auto ctx = desk_context(32, 256);
    const auto u0 = ctx.sine_initial_condition(1.0);
    const auto noise = sample_noise(ctx.noise_spec(), ctx.dt(), ctx.n_steps(), 1);
    for (auto _ : state) benchmark::DoNotOptimize(solve_spde(ctx, u0, 1e-3, noise));
    state.SetItemsProcessed(state.iterations() * ctx.n_steps());
}
BENCHMARK(BM_SpdePath)->Unit(benchmark::kMillisecond);

void BM_MdpPath(benchmark::State& state) {
    const auto ctx = desk_context(32, 256);
    const ReferenceSolution ref(ctx, solve_deterministic(ctx, ctx.sine_initial_condition(1.0)));
    const auto noise = sample_noise(ctx.noise_spec(), ctx.dt(), ctx.n_steps(), 1);
    const SpeedFunction speed(0.25);
    for (auto _ : state) benchmark::DoNotOptimize(solve_mdp_process(ctx, ref, 1e-3, speed, noise));
    state.SetItemsProcessed(state.iterations() * ctx.n_steps());
}
BENCHMARK(BM_MdpPath)->Unit(benchmark::kMillisecond);

void BM_RateFunction(benchmark::State& state) {
    const auto ctx = desk_context(8, 64);
    const ReferenceSolution ref(ctx, solve_deterministic(ctx, ctx.sine_initial_condition(1.0)));
    std::vector<double> target(8);
    for (int k = 0; k < 8; ++k) target[k] = 0.01 * std::cos(k);
    for (auto _ : state) benchmark::DoNotOptimize(rate_function_endpoint(ctx, ref, target));
}
BENCHMARK(BM_RateFunction)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
