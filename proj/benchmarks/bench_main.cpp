#include <benchmark/benchmark.h>

#include <vector>

#include "vpme/ensemble.hpp"
#include "vpme/measures.hpp"
#include "vpme/mollifier.hpp"
#include "vpme/pic.hpp"
#include "vpme/poisson.hpp"
#include "vpme/spectral.hpp"

using namespace vpme;

namespace {

ParticleEnsemble ensemble(std::size_t n, std::uint64_t seed) {
  DensitySpec f;
  f.family = DensityFamily::perturbed_maxwellian;
  f.alpha = 0.2;
  return sample_iid(f, n, seed);
}

void BM_FftRoundTrip(benchmark::State& state) {
  const TorusGrid g(2, static_cast<int>(state.range(0)));
  const auto& s = Spectral::for_grid(g);
  std::vector<double> values(g.cells(), 1.0);
  for (auto _ : state) {
    auto c = s.forward(values);
    values = s.inverse(c);
    benchmark::DoNotOptimize(values.data());
  }
}
BENCHMARK(BM_FftRoundTrip)->Arg(64)->Arg(128)->Arg(256);

void BM_FullPotential(benchmark::State& state) {
  const TorusGrid g(2, 64);
  const auto m = make_mollifier(0.0625, g);
  const auto rho = deposit_mollified_density(ensemble(4096, 1), g, m);
  const double eps = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(solve_full_potential(rho, eps));
}
BENCHMARK(BM_FullPotential)->Arg(100)->Arg(20)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Deposit(benchmark::State& state) {
  const TorusGrid g(2, 64);
  const auto m = make_mollifier(0.0625, g);
  const auto e = ensemble(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(deposit_mollified_density(e, g, m));
}
BENCHMARK(BM_Deposit)->Arg(1024)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);

void BM_ExactAssignment(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = to_cloud(ensemble(n, 3));
  const auto b = to_cloud(ensemble(n, 4));
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein_exact(a, b, MetricSpec{}));
}
BENCHMARK(BM_ExactAssignment)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Auction(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = to_cloud(ensemble(4 * n, 5));
  const auto b = to_cloud(ensemble(n, 6));
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein_auction(a, b, MetricSpec{}));
}
BENCHMARK(BM_Auction)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
