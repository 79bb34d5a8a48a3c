// Serial versus OpenMP-parallel assembly of the full Nitsche system and of
// the load data it consumes.
#include <benchmark/benchmark.h>

#include <map>
#include <utility>

#include "kls/assembly.hpp"
#include "kls/trace.hpp"

namespace {

const kls::Discretization& disc(int degree, int mesh) {
  static std::map<std::pair<int, int>, kls::Discretization> cache;
  auto it = cache.find({degree, mesh});
  if (it == cache.end()) it = cache.emplace(std::pair{degree, mesh}, kls::make_discretization(kls::get_problem(3), degree, mesh)).first;
  return it->second;
}

void assemble_system(benchmark::State& state, kls::Execution exec) {
  const kls::Discretization& d = disc(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const kls::LoadData loads = kls::generate_load_data(d.spec, d.rule, d.degree);
  kls::AssemblyOptions opt;
  opt.exec = exec;
  for (auto _ : state) {
    kls::AssembledSystem s = kls::assemble(d, &loads, kls::PenaltyConfig{}, opt);
    benchmark::DoNotOptimize(s.K.data());
  }
  state.counters["dofs"] = d.num_dofs();
}

void BM_AssembleSerial(benchmark::State& state) { assemble_system(state, kls::Execution::Serial); }
void BM_AssembleParallel(benchmark::State& state) { assemble_system(state, kls::Execution::Parallel); }

BENCHMARK(BM_AssembleSerial)->Args({3, 8})->Args({4, 16})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleParallel)->Args({3, 8})->Args({4, 16})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
