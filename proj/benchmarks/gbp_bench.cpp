#include <benchmark/benchmark.h>

#include "gbpn/gbp.hpp"
#include "gbpn/io.hpp"
#include "gbpn/oracle.hpp"
#include "gbpn/synth.hpp"

namespace {

using namespace gbpn;

struct Fixture {
  SynthScene scene;
  DepthGrid sparse;
  GridGraph graph;
  MrfParams params;

  Fixture()
      : scene(make_piecewise_planar_scene({})),
        sparse(sample_sparse(scene.depth, 500, 1)),
        graph(GridGraph::build_local(scene.depth.height(), scene.depth.width(), Connectivity::Eight)
                  .with_nonlocal(propose_nonlocal_edges(scene.guide, {}))),
        params(params_from_guide(scene.guide, sparse, graph, {})) {}
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_SerialSweep(benchmark::State& state) {
  const auto& f = fixture();
  SolverConfig cfg;
  cfg.threads = static_cast<int>(state.range(0));
  GbpSolver solver(f.graph, f.params, cfg);
  for (auto _ : state) {
    solver.serial_sweep(Sweep::LeftToRight);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.graph.sweep_edges(Sweep::LeftToRight).size()));
}
BENCHMARK(BM_SerialSweep)->Arg(1)->Arg(4);

void BM_NonlocalStep(benchmark::State& state) {
  const auto& f = fixture();
  GbpSolver solver(f.graph, f.params);
  solver.iterate();
  for (auto _ : state) {
    solver.parallel_nonlocal_step();
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.graph.nonlocal_edges().size()));
}
BENCHMARK(BM_NonlocalStep);

void BM_RunDefault(benchmark::State& state) {
  const auto& f = fixture();
  SolverConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(run_gbp(f.params, f.graph, cfg));
}
BENCHMARK(BM_RunDefault)->Unit(benchmark::kMillisecond);

void BM_ProposeNonlocal(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(propose_nonlocal_edges(f.scene.guide, {}));
}
BENCHMARK(BM_ProposeNonlocal)->Unit(benchmark::kMillisecond);

void BM_SolveExact(benchmark::State& state) {
  const auto& f = fixture();
  const auto sys = assemble_system(f.params, f.graph);
  for (auto _ : state) benchmark::DoNotOptimize(solve_exact(sys));
}
BENCHMARK(BM_SolveExact)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
