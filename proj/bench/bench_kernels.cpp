// Serial reference vs OpenMP for the hot loops: the product-integration
// convolution behind every Picard step, the lambda certificate grid and a full
// Picard solve.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "fdelay/kernels.hpp"
#include "fdelay/mlf.hpp"
#include "fdelay/solver.hpp"

using namespace fdelay;

namespace {

void convolution(benchmark::State& state, Execution exec) {
  const int cells = static_cast<int>(state.range(0));
  const ProductWeights w(0.5, 1.0 / cells, cells);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> f(cells + 1), out(cells + 1);
  for (auto& v : f) v = u(rng);
  for (auto _ : state) {
    kernels::fractional_convolution(exec, w, f, {}, {}, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(cells);
}

void certificate(benchmark::State& state, Execution exec) {
  const LambdaSearchSpec spec{.c = 1, .d = 0.2, .beta = 0.6, .r = 0.05, .horizon = 2,
                              .grid_points = static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(verify_ml_inequality(spec, 64.0, exec).max_ratio);
}

void picard(benchmark::State& state, Execution exec) {
  DelayIVP ivp;
  ivp.alpha = 0.5;
  ivp.T = 2.0;
  ivp.phi = HistorySpec::from_expression(Expression::constant(1.0), 1);
  ivp.f = Expression::parse("U(1) - 0.5*U(0)");
  const SolverConfig cfg{.n_steps = static_cast<int>(state.range(0)), .exec = exec};
  for (auto _ : state) benchmark::DoNotOptimize(solve_picard(ivp, cfg).first.values().back());
}

}  // namespace

BENCHMARK_CAPTURE(convolution, serial, Execution::Serial)->RangeMultiplier(4)->Range(256, 4096)->Complexity();
BENCHMARK_CAPTURE(convolution, omp, Execution::Parallel)->RangeMultiplier(4)->Range(256, 4096)->Complexity();
BENCHMARK_CAPTURE(certificate, serial, Execution::Serial)->Arg(64);
BENCHMARK_CAPTURE(certificate, omp, Execution::Parallel)->Arg(64);
BENCHMARK_CAPTURE(picard, serial, Execution::Serial)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(picard, omp, Execution::Parallel)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
