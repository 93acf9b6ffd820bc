// Parallel kernels against their serial counterparts.

#include <benchmark/benchmark.h>

#include "qte/kernel_density.hpp"
#include "qte/laws.hpp"
#include "qte/reference/kernel_density_serial.hpp"
#include "qte/simulation.hpp"

namespace {

void BM_DensityParallel(benchmark::State& state) {
  const auto data = qte::Law::laplace().sample(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(qte::fit_adaptive_density(data));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DensitySerial(benchmark::State& state) {
  const auto data = qte::Law::laplace().sample(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(qte::reference::fit_adaptive_density_serial(data));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

qte::ScenarioSpec bench_spec() {
  qte::ScenarioSpec spec;
  spec.law = "cauchy";
  spec.n0 = 2000;
  spec.n1 = 2000;
  spec.reps = 16;
  spec.seed = 3;
  spec.estimators = {"means", "medians", "eif", "waq"};
  return spec;
}

void BM_ScenarioParallel(benchmark::State& state) {
  const auto spec = bench_spec();
  for (auto _ : state) benchmark::DoNotOptimize(qte::run_scenario(spec, qte::Execution::Parallel));
}

void BM_ScenarioSerial(benchmark::State& state) {
  const auto spec = bench_spec();
  for (auto _ : state) benchmark::DoNotOptimize(qte::run_scenario(spec, qte::Execution::Serial));
}

}  // namespace

BENCHMARK(BM_DensityParallel)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DensitySerial)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ScenarioParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ScenarioSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
