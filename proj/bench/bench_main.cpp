// Serial reference implementations against their OpenMP counterparts.
//
//   qtraj_bench --benchmark_filter=Ensemble
//   qtraj_bench --benchmark_filter=Fig1LongRun   # gamma = 1e4, 10^6 steps

#include <benchmark/benchmark.h>
#include <omp.h>

#include "qtraj/ensemble.hpp"
#include "qtraj/jump.hpp"
#include "qtraj/models.hpp"
#include "qtraj/sde.hpp"

using namespace qtraj;

namespace {

RealVector populations() {
    RealVector p(3);
    p << 0.5, 0.3, 0.2;
    return p;
}

EnsembleOptions ensemble_options(Index n) {
    EnsembleOptions o;
    o.n_trajectories = n;
    o.t_end = 0.02;
    o.h = 1e-4;
    o.base_seed = 1;
    o.save_stride = 50;
    return o;
}

void BM_EnsembleSerial(benchmark::State& state) {
    const ThreeScaleModel m = fig1_model(10.0);
    const DensityMatrix rho0 = DensityMatrix::coherent(populations());
    const EnsembleOptions o = ensemble_options(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(simulate_ensemble_serial(m, rho0, o));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EnsembleOpenMP(benchmark::State& state) {
    const ThreeScaleModel m = fig1_model(10.0);
    const DensityMatrix rho0 = DensityMatrix::coherent(populations());
    EnsembleOptions o = ensemble_options(state.range(0));
    o.threads = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(simulate_ensemble(m, rho0, o));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_JumpSerial(benchmark::State& state) {
    const MarkovGenerator t{fig1_rates()};
    const std::vector<double> times{0.5, 1.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_jump_ensemble_serial(t, populations(), 1.0, state.range(0), 1, times));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_JumpOpenMP(benchmark::State& state) {
    const MarkovGenerator t{fig1_rates()};
    const std::vector<double> times{0.5, 1.0};
    const int threads = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_jump_ensemble(t, populations(), 1.0, state.range(0), 1, times, threads));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SdeStep(benchmark::State& state) {
    const ThreeScaleModel m = fig1_model(100.0);
    const StepPlan plan = plan_steps(1e-2, default_step(1e-3, m.gamma));
    for (auto _ : state) {
        integrate(m, DensityMatrix::coherent(populations()), plan, 3, [](Index, double, const Matrix&) {});
    }
    state.SetItemsProcessed(state.iterations() * plan.n_steps);
}

// gamma = 1e4 and 1e6 steps of the default step rule.
void BM_Fig1LongRun(benchmark::State& state) {
    const ThreeScaleModel m = fig1_model(1e4);
    const double h = default_step(1e-3, m.gamma);
    const StepPlan plan{1000000, h};
    for (auto _ : state) {
        integrate(m, DensityMatrix::coherent(populations()), plan, 11, [](Index, double, const Matrix&) {});
    }
    state.SetItemsProcessed(state.iterations() * plan.n_steps);
}

void thread_args(benchmark::internal::Benchmark* b, std::initializer_list<long> sizes) {
    const int max_threads = omp_get_max_threads();
    for (long n : sizes) {
        for (int t = 1; t <= max_threads; t *= 2) b->Args({n, t});
        if ((max_threads & (max_threads - 1)) != 0) b->Args({n, max_threads});
    }
}

}  // namespace

BENCHMARK(BM_EnsembleSerial)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleOpenMP)->Apply([](auto* b) { thread_args(b, {64, 512}); })->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_JumpSerial)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JumpOpenMP)->Apply([](auto* b) { thread_args(b, {10000, 100000}); })->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SdeStep)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Fig1LongRun)->Iterations(1)->Unit(benchmark::kSecond);

BENCHMARK_MAIN();
