#include "nmpc/alpha_table.hpp"
#include "nmpc/dynamics.hpp"
#include "nmpc/ocp.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_SyncgenSolve(benchmark::State& state) {
    const nmpc::ControlSystem sys = nmpc::make_syncgen();
    nmpc::Vector x0(3);
    x0 << 1.02, 0.1, 1.014;
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(nmpc::solve(sys, x0, N).value);
    }
}
BENCHMARK(BM_SyncgenSolve)->Arg(19)->Arg(30)->Unit(benchmark::kMillisecond);

// the warm-started re-solve one sample later is what the closed loop pays per event
void BM_SyncgenWarmResolve(benchmark::State& state) {
    const nmpc::ControlSystem sys = nmpc::make_syncgen();
    nmpc::Vector x0(3);
    x0 << 1.02, 0.1, 1.014;
    const int N = static_cast<int>(state.range(0));
    const nmpc::OcpSolution first = nmpc::solve(sys, x0, N);
    const nmpc::ControlSequence warm = nmpc::shift_warm_start(first, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nmpc::solve(sys, first.trajectory[1], N, warm).value);
    }
}
BENCHMARK(BM_SyncgenWarmResolve)->Arg(19)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_AlphaTable(benchmark::State& state) {
    const nmpc::ExpoControllability ec(4.0, 0.6);
    const int N_max = static_cast<int>(state.range(0));
    for (auto _ : state) {
        double acc = 0.0;
        for (int N = 2; N <= N_max; ++N)
            for (int m = 1; m < N; ++m) acc += nmpc::alpha_nm(N, m, ec);
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(BM_AlphaTable)->Arg(30)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
