#include <benchmark/benchmark.h>

#include <vector>

#include "qgrm/matrix_model.hpp"
#include "qgrm/pair_partition.hpp"
#include "qgrm/spectral_stats.hpp"

using namespace qgrm;

static void BM_FillNormal(benchmark::State& state) {
  std::vector<double> out(static_cast<std::size_t>(state.range(0)));
  RngStream rng(1, 2);
  for (auto _ : state) {
    rng.fill_normal(out.data(), out.size());
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FillNormal)->Arg(1 << 10)->Arg(1 << 16);

static void BM_StandardHermitian(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::uint64_t s = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_standard_hermitian(dim, StreamKey{1, s++}));
}
BENCHMARK(BM_StandardHermitian)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_AssembleS(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  ModelConfig cfg{WeightScheme::bernoulli(N, 1.0, 2), GammaSpec::identity({"m"}), 3};
  std::uint64_t s = 0;
  for (auto _ : state) benchmark::DoNotOptimize(assemble_S(cfg, s++));
}
BENCHMARK(BM_AssembleS)->DenseRange(6, 10, 2)->Unit(benchmark::kMillisecond);

static void BM_TraceFourthPower(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const std::vector<HermitianMatrix> family{sample_standard_hermitian(dim, StreamKey{2, 2})};
  for (auto _ : state) benchmark::DoNotOptimize(trace_word(family, {0, 0, 0, 0}));
}
BENCHMARK(BM_TraceFourthPower)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_CrossingPolynomial(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(crossing_polynomial(m));
}
BENCHMARK(BM_CrossingPolynomial)->DenseRange(4, 8, 2);

static void BM_NuQMoments(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(nu_q_moments(0.5, 10));
}
BENCHMARK(BM_NuQMoments)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
