// Serial reference vs OpenMP kernels: similarity-table generation and the
// bandwidth/seed sweep.

#include <benchmark/benchmark.h>

#include "semalloc/similarity.hpp"
#include "semalloc/sweep.hpp"

using namespace semalloc;

namespace {

// A fine grid so that table generation is long enough to time.
GridSpec fine_grid() {
  GridSpec g;
  g.snr_step_db = 0.01;
  g.o_step = 0.001;
  return g;
}

SweepSpec bench_spec() {
  auto spec = SweepSpec::defaults();
  spec.seeds = {1, 2, 3, 4};
  return spec;
}

void BM_TableSerial(benchmark::State& state) {
  const auto g = fine_grid();
  const auto snr = g.snr_grid();
  const auto o = g.compression_grid();
  for (auto _ : state) benchmark::DoNotOptimize(generate_table_serial(snr, o, SurrogateParams{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(snr.size() * o.size()));
}

void BM_TableParallel(benchmark::State& state) {
  const auto g = fine_grid();
  const auto snr = g.snr_grid();
  const auto o = g.compression_grid();
  for (auto _ : state) benchmark::DoNotOptimize(generate_table(snr, o, SurrogateParams{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(snr.size() * o.size()));
}

void BM_SweepSerial(benchmark::State& state) {
  const auto spec = bench_spec();
  const auto table = default_table();
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep_serial(spec, table));
}

void BM_SweepParallel(benchmark::State& state) {
  const auto spec = bench_spec();
  const auto table = default_table();
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(spec, table));
}

}  // namespace

BENCHMARK(BM_TableSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TableParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
