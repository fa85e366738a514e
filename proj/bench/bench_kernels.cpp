#include <benchmark/benchmark.h>

#include <cmath>

#include "covpath/dataio.hpp"
#include "covpath/fitting.hpp"
#include "covpath/kernels.hpp"
#include "covpath/random.hpp"
#include "covpath/wls.hpp"

using namespace covpath;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void BM_FdGradient(benchmark::State& state) {
  Rng rng(1);
  const Matrix w = random_gaussian(40, 40, rng);
  auto f = [&](const Vector& x) { return std::sin(x.dot(w * x)) + x.squaredNorm(); };
  const Vector x = random_gaussian(40, 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::fd_gradient(f, x, 1e-6, exec_of(state)));
}

void BM_HhatOperator(benchmark::State& state) {
  Rng rng(2);
  const SpdMatrix p0 = random_spd(6, rng);
  const SymMatrix pi = random_symmetric(6, rng, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(hhat_operator(p0, pi, 1.3, exec_of(state)).array);
}

void BM_WindowMoments(benchmark::State& state) {
  Rng rng(3);
  const Matrix samples = random_gaussian(120000, 16, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::window_second_moments(samples, 1200, 100, exec_of(state)));
}

void BM_MultistartFit(benchmark::State& state) {
  const SynthData data = synth_generate(Family::info, 3, 9, 0.05, 4);
  FitOptions opts;
  opts.exec = exec_of(state);
  opts.multistart = 4;
  for (auto _ : state) benchmark::DoNotOptimize(fit(data.seq, Family::info, opts).objective);
}

}  // namespace

BENCHMARK(BM_FdGradient)->Arg(0)->Arg(1);
BENCHMARK(BM_HhatOperator)->Arg(0)->Arg(1);
BENCHMARK(BM_WindowMoments)->Arg(0)->Arg(1);
BENCHMARK(BM_MultistartFit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
