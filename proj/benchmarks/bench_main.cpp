#include <benchmark/benchmark.h>

#include "mirrorstrat/certificates.hpp"
#include "mirrorstrat/experiments.hpp"
#include "mirrorstrat/random.hpp"
#include "mirrorstrat/regularizers.hpp"
#include "mirrorstrat/solvers.hpp"

using namespace mirrorstrat;

static void BM_Svd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix m = gaussian_matrix(n, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(svd(m));
}
BENCHMARK(BM_Svd)->Arg(5)->Arg(10)->Arg(20);

static void BM_NuclearProx(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseVector x = gaussian_matrix(n, n, 2).flatten();
  const NuclearNorm kind{n};
  for (auto _ : state) benchmark::DoNotOptimize(prox(kind, 1.0, x));
}
BENCHMARK(BM_NuclearProx)->Arg(10)->Arg(20);

static void BM_FbIterations(benchmark::State& state) {
  const ProblemInstance inst = gen_instance(ExperimentConfig::l1_default(), 3);
  SolverParams p;
  p.gamma = 1.8 * fb_step_bound(inst) / 2.0;
  p.max_iters = 100;
  p.stop_tol = 0.0;
  const SolveOptions o{Recording::kResidual, {}, {}};
  for (auto _ : state) benchmark::DoNotOptimize(fb_solve(inst, p, o));
  state.SetItemsProcessed(state.iterations() * p.max_iters);
}
BENCHMARK(BM_FbIterations);

static void BM_ReferenceSolveL1(benchmark::State& state) {
  const ProblemInstance inst = gen_instance(ExperimentConfig::l1_default(), 4);
  for (auto _ : state) benchmark::DoNotOptimize(reference_solve(inst));
}
BENCHMARK(BM_ReferenceSolveL1)->Unit(benchmark::kMillisecond);

static void BM_CertificateL1(benchmark::State& state) {
  const ProblemInstance inst = gen_instance(ExperimentConfig::l1_default(), 5, true);
  for (auto _ : state) benchmark::DoNotOptimize(min_norm_certificate(inst.phi, inst.truth->x0, L1Norm{100}));
}
BENCHMARK(BM_CertificateL1)->Unit(benchmark::kMillisecond);

static void BM_CertificateNuclear(benchmark::State& state) {
  const ProblemInstance inst = gen_instance(ExperimentConfig::nuclear_default(), 6, true);
  for (auto _ : state) benchmark::DoNotOptimize(min_norm_certificate(inst.phi, inst.truth->x0, NuclearNorm{20}));
}
BENCHMARK(BM_CertificateNuclear)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
