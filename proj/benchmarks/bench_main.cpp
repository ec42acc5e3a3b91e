#include <benchmark/benchmark.h>

#include <vector>

#include "clustergas/geometry.hpp"
#include "clustergas/gibbs_mc.hpp"
#include "clustergas/ground_state.hpp"
#include "clustergas/potential.hpp"
#include "clustergas/rng.hpp"

using namespace clustergas;

namespace {

const PotentialSpec& lj() {
  static const PotentialSpec spec = PotentialSpec::default_lennard_jones();
  return spec;
}

Configuration packed(int dim, int n, double density) {
  const double L = std::pow(n / density, 1.0 / dim);
  return initial_configuration(lj(), dim, n, L, 1);
}

void BM_Decompose(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Configuration c = packed(2, n, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(decompose(c, 2.0));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Decompose)->Arg(100)->Arg(1000)->Arg(10000);

void BM_TotalEnergy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Configuration c = packed(3, n, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(total_energy(lj(), c));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TotalEnergy)->Arg(100)->Arg(1000);

void BM_MCSweeps(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const double L = std::sqrt(n / 0.1);
  MCParams p;
  p.n_sweeps = 100;
  p.burn_in_sweeps = 0;
  p.seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(run_canonical(lj(), 2, n, L, 2.0, 2.0, p));
  state.SetItemsProcessed(state.iterations() * n * p.n_sweeps);
}
BENCHMARK(BM_MCSweeps)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_MinimizeCluster(benchmark::State& state) {
  GroundStateOptions o;
  o.dim = 2;
  o.multistarts = 4;
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(minimize_cluster(lj(), k, o, 5));
}
BENCHMARK(BM_MinimizeCluster)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
