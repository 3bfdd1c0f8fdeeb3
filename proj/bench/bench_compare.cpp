#include <benchmark/benchmark.h>

#include "ivr/compare.hpp"
#include "ivr/family.hpp"

namespace {

ivr::Program family(std::size_t blocks) {
  ivr::GenConfig cfg;
  cfg.blocks = blocks;
  return ivr::parse(ivr::generate(cfg).source);
}

void BM_CompareSerial(benchmark::State& state) {
  const ivr::Program p = family(static_cast<std::size_t>(state.range(0)));
  const auto pi = ivr::VarOrder::identity(p.vars.size());
  ivr::CompareConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(ivr::compare_serial(p, pi, cfg));
}

void BM_CompareParallel(benchmark::State& state) {
  const ivr::Program p = family(static_cast<std::size_t>(state.range(0)));
  const auto pi = ivr::VarOrder::identity(p.vars.size());
  ivr::CompareConfig cfg;
  cfg.workers = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(ivr::compare_parallel(p, pi, cfg));
}

}  // namespace

BENCHMARK(BM_CompareSerial)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CompareParallel)->Args({3, 1})->Args({3, 4})->Args({4, 1})->Args({4, 4})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
