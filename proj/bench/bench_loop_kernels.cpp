#include <benchmark/benchmark.h>

#include "approxk/loop_kernels.hpp"

using namespace approxk;
using kernels::Samples;

namespace {

Samples make(Index grid, Index fiber, std::uint64_t seed) {
  Rng rng(seed);
  Samples s;
  for (Index j = 0; j < grid; ++j) s.push_back(random_gaussian(fiber, fiber, rng) + 4.0 * identity(fiber));
  return s;
}

template <Samples (*F)(const Samples&, const Samples&)>
void BM_Mul(benchmark::State& st) {
  Samples a = make(st.range(0), st.range(1), 1), b = make(st.range(0), st.range(1), 2);
  for (auto _ : st) benchmark::DoNotOptimize(F(a, b));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <Samples (*F)(const Samples&, const Tol&)>
void BM_Inverse(benchmark::State& st) {
  Samples a = make(st.range(0), st.range(1), 3);
  Tol tol;
  for (auto _ : st) benchmark::DoNotOptimize(F(a, tol));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <std::vector<double> (*F)(const Samples&)>
void BM_Phase(benchmark::State& st) {
  Samples a = make(st.range(0), st.range(1), 4);
  for (auto _ : st) benchmark::DoNotOptimize(F(a));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <double (*F)(const Samples&)>
void BM_SupNorm(benchmark::State& st) {
  Samples a = make(st.range(0), st.range(1), 5);
  for (auto _ : st) benchmark::DoNotOptimize(F(a));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void sizes(benchmark::internal::Benchmark* b) {
  for (long grid : {720, 4096})
    for (long fiber : {2, 8, 24}) b->Args({grid, fiber});
}

}  // namespace

BENCHMARK(BM_Mul<kernels::serial::mul>)->Name("mul/serial")->Apply(sizes)->UseRealTime();
BENCHMARK(BM_Mul<kernels::parallel::mul>)->Name("mul/parallel")->Apply(sizes)->UseRealTime();
BENCHMARK(BM_Inverse<kernels::serial::inverse>)->Name("inverse/serial")->Apply(sizes)->UseRealTime();
BENCHMARK(BM_Inverse<kernels::parallel::inverse>)->Name("inverse/parallel")->Apply(sizes)->UseRealTime();
BENCHMARK(BM_Phase<kernels::serial::det_phase_steps>)->Name("det_phase/serial")->Apply(sizes)->UseRealTime();
BENCHMARK(BM_Phase<kernels::parallel::det_phase_steps>)->Name("det_phase/parallel")->Apply(sizes)->UseRealTime();
BENCHMARK(BM_SupNorm<kernels::serial::sup_norm>)->Name("sup_norm/serial")->Apply(sizes)->UseRealTime();
BENCHMARK(BM_SupNorm<kernels::parallel::sup_norm>)->Name("sup_norm/parallel")->Apply(sizes)->UseRealTime();

BENCHMARK_MAIN();
