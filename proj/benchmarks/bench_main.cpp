#include <benchmark/benchmark.h>

#include "varlpec/branch_cut.hpp"
#include "varlpec/cvar.hpp"
#include "varlpec/lower_bound.hpp"
#include "varlpec/smoothing.hpp"
#include "varlpec/upper_bound.hpp"

using namespace varlpec;

namespace {

const Instance& paper() {
  static const Instance inst = prepare(paper_instance(0.9));
  return inst;
}

}  // namespace

static void BM_CvarMin(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(minimize_cvar(paper()).cvar);
}
BENCHMARK(BM_CvarMin)->Unit(benchmark::kMillisecond);

static void BM_VarOf(benchmark::State& state) {
  const std::vector<double> x = minimize_cvar(paper()).x;
  for (auto _ : state) benchmark::DoNotOptimize(var_of(paper(), x));
}
BENCHMARK(BM_VarOf)->Unit(benchmark::kMicrosecond);

static void BM_Improve(benchmark::State& state) {
  const std::vector<double> x = minimize_cvar(paper()).x;
  ImproveOptions o;
  o.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(improve(paper(), x, o).m_ub);
}
BENCHMARK(BM_Improve)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_ZsubRoot(benchmark::State& state) {
  for (auto _ : state) {
    const RelaxModel r = z_relax_model(paper(), MSign::kNonNeg);
    benchmark::DoNotOptimize(solve_relax(r, paper()).value);
  }
}
BENCHMARK(BM_ZsubRoot)->Unit(benchmark::kMillisecond);

static void BM_Corollary(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(corollary_bound(paper(), static_cast<int>(state.range(0))).value);
  }
}
BENCHMARK(BM_Corollary)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_Verify(benchmark::State& state) {
  const LpecPoint cand = improve(paper(), minimize_cvar(paper()).x).witness;
  for (auto _ : state) benchmark::DoNotOptimize(verify_global(paper(), cand).m_lb);
}
BENCHMARK(BM_Verify)->Unit(benchmark::kMillisecond);

static void BM_SolveGlobal(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(solve_global(paper()).m_ub);
}
BENCHMARK(BM_SolveGlobal)->Unit(benchmark::kMillisecond)->Iterations(3);

static void BM_EnumeratePieces(benchmark::State& state) {
  const Instance inst = prepare(random_instance(17, 3, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_pieces(inst).value);
}
BENCHMARK(BM_EnumeratePieces)->DenseRange(3, 7, 2)->Unit(benchmark::kMillisecond);

static void BM_SmoothedVar(benchmark::State& state) {
  const std::vector<double> x = minimize_cvar(paper()).x;
  const SmoothKind kind{SmoothFn::kSqrtHyperbola, 1e-3};
  for (auto _ : state) benchmark::DoNotOptimize(smoothed_var(paper(), kind, x));
}
BENCHMARK(BM_SmoothedVar);

static void BM_SmoothMinimize(benchmark::State& state) {
  const std::vector<double> x = minimize_cvar(paper()).x;
  for (auto _ : state) benchmark::DoNotOptimize(smooth_minimize(paper(), x).m);
}
BENCHMARK(BM_SmoothMinimize)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
