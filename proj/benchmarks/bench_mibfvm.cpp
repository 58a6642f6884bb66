#include <benchmark/benchmark.h>

#include <vector>

#include "mibfvm/mibfvm.hpp"

using namespace mibfvm;

namespace {

void BM_FdWeights(benchmark::State& state) {
  std::vector<double> nodes;
  for (int i = 0; i < state.range(0); ++i) nodes.push_back(-1.0 + 0.37 * i);
  for (auto _ : state) benchmark::DoNotOptimize(fd_weights(0.11, nodes, 1));
}
BENCHMARK(BM_FdWeights)->Arg(3)->Arg(4)->Arg(6);

void BM_ClassifiedMesh(benchmark::State& state) {
  const auto problem = make_case("case3a");
  const MeshSpec spec = problem.mesh_spec(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_classified_mesh(spec, problem.shape(), problem.mesh_options()));
}
BENCHMARK(BM_ClassifiedMesh)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_FictitiousValues(benchmark::State& state) {
  const auto problem = make_case("case3a");
  const ClassifiedMesh mesh =
      build_classified_mesh(problem.mesh_spec(static_cast<int>(state.range(0))), problem.shape());
  for (auto _ : state) {
    FictitiousTable table = solve_fictitious_values(mesh, problem);
    disassociation_pass(mesh, table);
    benchmark::DoNotOptimize(table);
  }
}
BENCHMARK(BM_FictitiousValues)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_AssembleAndSolve(benchmark::State& state) {
  const auto problem = make_case("case3a");
  const ClassifiedMesh mesh =
      build_classified_mesh(problem.mesh_spec(static_cast<int>(state.range(0))), problem.shape());
  FictitiousTable table = solve_fictitious_values(mesh, problem);
  disassociation_pass(mesh, table);
  for (auto _ : state) {
    LinearSystem system = assemble(mesh, table, problem);
    apply_dirichlet(system, mesh, [&](const Point& x) { return problem.g_b(x); });
    benchmark::DoNotOptimize(solve_with_fallback(system, mesh.spec(), {}));
  }
}
BENCHMARK(BM_AssembleAndSolve)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_Case1Study(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(run_convergence("case1", {40, 80}));
}
BENCHMARK(BM_Case1Study)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
