#include <benchmark/benchmark.h>

#include "dualpinn/config.hpp"
#include "dualpinn/trainer.hpp"

using namespace dualpinn;

namespace {

RunConfig small_poisson() {
  RunConfig c;
  c.problem = "poisson";
  c.nets = "dual_net";
  c.curriculum = "two_phase";
  c.domain_net.hidden = {32, 32, 32};
  c.boundary_net.hidden = {16, 16};
  c.n_boundary_per_edge = 32;
  c.n_interior_phase1 = 512;
  c.n_interior_phase2 = 512;
  c.phase1_epochs = 8;
  c.phase2_epochs = 8;
  c.patience = 1000;
  return c;
}

}  // namespace

static void BM_TrainEpochsPoisson(benchmark::State& state) {
  const RunConfig config = small_poisson();
  const PdeProblem problem = make_problem(config);
  for (auto _ : state) {
    RunResult r = run_protocol(problem, config);
    benchmark::DoNotOptimize(r.metrics.rel_l2);
  }
  state.SetItemsProcessed(state.iterations() * 16);  // epochs per run
}
BENCHMARK(BM_TrainEpochsPoisson)->Unit(benchmark::kMillisecond);

static void BM_Evaluate(benchmark::State& state) {
  const RunConfig config = small_poisson();
  const PdeProblem problem = make_problem(config);
  DualNets nets;
  nets.domain = init_xavier({2, 32, 32, 32, 1}, ActivationKind::tanh(), 7);
  nets.boundary = init_xavier({2, 16, 16, 1}, ActivationKind::tanh(), 8);
  for (auto _ : state) {
    MetricsRecord m = evaluate(nets, problem);
    benchmark::DoNotOptimize(m.rel_l2);
  }
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
