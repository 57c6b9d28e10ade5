// Serial vs OpenMP-parallel kernels on the convergence configuration.
#include <benchmark/benchmark.h>

#include <string>

#include "gmsfem/config.hpp"
#include "gmsfem/coupling.hpp"
#include "gmsfem/fem.hpp"
#include "gmsfem/parallel.hpp"
#include "gmsfem/pipeline.hpp"
#include "gmsfem/pou.hpp"
#include "gmsfem/solvers.hpp"

using namespace gmsfem;

namespace {

const RunConfig& config() {
  static const RunConfig cfg = load_config(std::string(GMSFEM_CONFIG_DIR) + "/convergence.json");
  return cfg;
}

const Problem& problem() {
  static const Problem pb = build_problem(config());
  return pb;
}

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel x" + std::to_string(workers()));
}

void BM_Stiffness(benchmark::State& state) {
  const Problem& pb = problem();
  for (auto _ : state) {
    if (state.range(0) < 0) {
      benchmark::DoNotOptimize(assemble_stiffness_reference(pb.mesh, pb.kappa));
    } else {
      benchmark::DoNotOptimize(assemble_stiffness(pb.mesh, pb.kappa, std::nullopt, mode(state)));
    }
  }
  if (state.range(0) < 0) {
    state.SetLabel("map reference");
  } else {
    label(state);
  }
}
BENCHMARK(BM_Stiffness)->Arg(-1)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MultiscalePou(benchmark::State& state) {
  const Problem& pb = problem();
  for (auto _ : state) benchmark::DoNotOptimize(multiscale_pou(pb.mesh, pb.coarse, pb.kappa, mode(state)));
  label(state);
}
BENCHMARK(BM_MultiscalePou)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Offline(benchmark::State& state) {
  const Problem& pb = problem();
  for (auto _ : state) benchmark::DoNotOptimize(run_offline(pb, config(), mode(state)));
  label(state);
}
BENCHMARK(BM_Offline)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_SchwarzApply(benchmark::State& state) {
  static const Problem& pb = problem();
  static const FineSystem fs = fine_system(pb, pb.kappa);
  static const PartitionOfUnity pou = bilinear_pou(pb.mesh, pb.coarse);
  static const TwoLevelPreconditioner B(fs.sys.A, free_rows(pou_coarse_basis(pb.mesh, pb.coarse, pou).P, fs.sys),
                                        subdomain_dofs(pb, fs.sys, 1));
  const Vector r = Vector::Ones(fs.sys.free_count());
  Vector z(r.size());
  for (auto _ : state) {
    if (state.range(0) == 0) {
      B.apply_reference(r, z);
    } else {
      B.apply(r, z);
    }
    benchmark::DoNotOptimize(z.data());
  }
  label(state);
}
BENCHMARK(BM_SchwarzApply)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
