#include <benchmark/benchmark.h>

#include "consfem/analysis.hpp"
#include "consfem/problems.hpp"
#include "consfem/saddle_solver.hpp"

using namespace consfem;

static void BM_LocalStiffness(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const Tensor2 mob{1.0, 0.2, 2.0};
  for (auto _ : state) benchmark::DoNotOptimize(local_stiffness(r, mob, 0.125));
}
BENCHMARK(BM_LocalStiffness)->Arg(1)->Arg(2);

static void BM_AssembleSystem(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const int level = static_cast<int>(state.range(1));
  const ProblemSpec p = problem_example1();
  const StructuredMesh mesh(level, p.boundary);
  const DualMesh dual(mesh);
  const FeSpace space(mesh, r);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_system(dual, space, p));
}
BENCHMARK(BM_AssembleSystem)->Args({1, 6})->Args({2, 6})->Unit(benchmark::kMillisecond);

static void BM_SolveSaddle(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const int level = static_cast<int>(state.range(1));
  const ProblemSpec p = problem_example1();
  const StructuredMesh mesh(level, p.boundary);
  const DualMesh dual(mesh);
  const FeSpace space(mesh, r);
  const SparseSystem sys = assemble_system(dual, space, p);
  for (auto _ : state) benchmark::DoNotOptimize(solve_saddle(sys));
}
BENCHMARK(BM_SolveSaddle)->Args({1, 5})->Args({2, 5})->Args({2, 6})->Unit(benchmark::kMillisecond);

static void BM_NormErrors(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  const ProblemSpec p = problem_example1();
  const StructuredMesh mesh(6, p.boundary);
  const DualMesh dual(mesh);
  const FeSpace space(mesh, 2);
  const Solution sol = solve_saddle(assemble_system(dual, space, p));
  for (auto _ : state) {
    benchmark::DoNotOptimize(norm_errors(sol, p, space, dual, {threads}));
  }
}
BENCHMARK(BM_NormErrors)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
