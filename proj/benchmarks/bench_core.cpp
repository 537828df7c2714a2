#include <benchmark/benchmark.h>

#include "cnvertex/bethe.hpp"
#include "cnvertex/fusion.hpp"

using namespace cnv;

static void BM_RMatrix(benchmark::State& st) {
  const RMatrixFamily R(static_cast<int>(st.range(0)));
  const cd u(0.3, 0.2);
  for (auto _ : st) benchmark::DoNotOptimize(R(u));
}
BENCHMARK(BM_RMatrix)->Arg(2)->Arg(3)->Arg(4);

static void BM_FusedRBar(benchmark::State& st) {
  const cd u(0.3, 0.2);
  for (auto _ : st) benchmark::DoNotOptimize(c3::r_bar_poly(u));
}
BENCHMARK(BM_FusedRBar);

static void BM_TransferPeriodic(benchmark::State& st) {
  const int N = static_cast<int>(st.range(0));
  Sampler s(1);
  const TransferMatrices tm(ChainSpec{3, random_theta(N, s), BoundaryKind::periodic, {}});
  const cd u(0.3, 0.2);
  for (auto _ : st) benchmark::DoNotOptimize(tm(TransferKind::t, u));
}
BENCHMARK(BM_TransferPeriodic)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_TransferOpenFused(benchmark::State& st) {
  const int N = static_cast<int>(st.range(0));
  Sampler s(2);
  const TransferMatrices tm(ChainSpec{3, random_theta(N, s), BoundaryKind::open, {}});
  const cd u(0.3, 0.2);
  for (auto _ : st) benchmark::DoNotOptimize(tm(TransferKind::t2, u));
}
BENCHMARK(BM_TransferOpenFused)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_OpenSpectrum(benchmark::State& st) {
  Sampler s(3);
  const TransferMatrices tm(ChainSpec{3, random_theta(1, s), BoundaryKind::open, {}});
  for (auto _ : st) benchmark::DoNotOptimize(spectrum(tm, 7));
}
BENCHMARK(BM_OpenSpectrum)->Unit(benchmark::kMillisecond);

static void BM_SolveOpenBae(benchmark::State& st) {
  const TQEvaluator ev(ChainSpec{3, {cd(0.27)}, BoundaryKind::open, {}}, TQModel::open_c3);
  for (auto _ : st) benchmark::DoNotOptimize(solve_bae(ev, {1, 0, 0}));
}
BENCHMARK(BM_SolveOpenBae)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
