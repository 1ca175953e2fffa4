#include <benchmark/benchmark.h>

#include <cmath>

#include "subfbsde/clock.hpp"
#include "subfbsde/coefficients.hpp"
#include "subfbsde/fbsde_solver.hpp"
#include "subfbsde/linear_solver.hpp"
#include "subfbsde/regression.hpp"
#include "subfbsde/subdiffusion.hpp"

using namespace subfbsde;

namespace {

const TimeGrid kGrid{0.1, 1.0, 100};
const SubordinatorSpec kJumps{1.0, CompoundPoissonJumps{2.0, ExponentialJumps{0.3}}};

void BM_SampleClocks(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_clock_ensemble(kJumps, kGrid, n, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleClocks)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_MakeEnsemble(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(make_ensemble(kJumps, kGrid, n, 1.0, 2));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MakeEnsemble)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SliceProjector(benchmark::State& state) {
  const auto ens = make_ensemble(kJumps, kGrid, 10000, 1.0, 3);
  BasisSpec basis;
  basis.degree = static_cast<int>(state.range(0));
  const auto features = state_features(*ens, 50, basis);
  std::vector<double> targets(ens->n_paths());
  for (std::size_t p = 0; p < targets.size(); ++p) targets[p] = std::sin(ens->X()(60, p));
  for (auto _ : state) {
    SliceProjector proj(features, basis.degree, basis.ridge_for(ens->n_paths()), 50);
    benchmark::DoNotOptimize(proj.project(targets));
  }
}
BENCHMARK(BM_SliceProjector)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_SolveLinear(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ens = make_ensemble(kJumps, kGrid, n, 1.0, 4);
  ForcingSet f = ForcingSet::zeros(kGrid.n_steps, n);
  for (double& v : f.b0.values()) v = 0.5;
  for (double& v : f.sigma0.values()) v = 0.2;
  for (auto _ : state) benchmark::DoNotOptimize(solve_linear(f, 1.0, ens));
}
BENCHMARK(BM_SolveLinear)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SolveFbsdeFlatten(benchmark::State& state) {
  const auto ens = make_ensemble(kJumps, kGrid, static_cast<std::size_t>(state.range(0)), 1.0, 5);
  ContinuationConfig cfg;
  cfg.check_hypothesis = false;
  for (auto _ : state) benchmark::DoNotOptimize(solve_fbsde(canonical_monotone(0.5), 1.0, ens, cfg));
}
BENCHMARK(BM_SolveFbsdeFlatten)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
