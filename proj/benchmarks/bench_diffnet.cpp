#include <benchmark/benchmark.h>

#include "dualpinn/diffnet.hpp"
#include "dualpinn/rng.hpp"

using namespace dualpinn;

namespace {

std::vector<double> random_points(std::size_t n, int dim, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> pts(n * static_cast<std::size_t>(dim));
  for (auto& v : pts) v = rng.uniform();
  return pts;
}

}  // namespace

static void BM_ForwardJetTanh(benchmark::State& state) {
  const auto width = static_cast<int>(state.range(0));
  MlpParams net = init_xavier({2, width, width, width, 1}, ActivationKind::tanh(), 1);
  const auto pts = random_points(256, 2, 2);
  for (auto _ : state) {
    auto jets = forward_jets(net, pts);
    benchmark::DoNotOptimize(jets.data());
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_ForwardJetTanh)->Arg(16)->Arg(32)->Arg(64);

static void BM_ForwardJetSine(benchmark::State& state) {
  const auto width = static_cast<int>(state.range(0));
  MlpParams net = init_siren({2, width, width, width, 1}, 30.0, 1);
  const auto pts = random_points(256, 2, 2);
  for (auto _ : state) {
    auto jets = forward_jets(net, pts);
    benchmark::DoNotOptimize(jets.data());
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_ForwardJetSine)->Arg(16)->Arg(32);

static void BM_BackpropJets(benchmark::State& state) {
  const auto width = static_cast<int>(state.range(0));
  MlpParams net = init_xavier({2, width, width, width, 1}, ActivationKind::tanh(), 1);
  const auto pts = random_points(256, 2, 2);
  std::vector<JetCotangent> cots(256);
  for (auto& c : cots) {
    c.d_value = 1.0;
    c.d_grad = {0.5, -0.5};
    c.d_hess_diag = {0.25, 0.25};
  }
  for (auto _ : state) {
    auto grads = backprop_jets(net, pts, cots);
    benchmark::DoNotOptimize(grads.layers.data());
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_BackpropJets)->Arg(16)->Arg(32)->Arg(64);

static void BM_BackpropValues(benchmark::State& state) {
  MlpParams net = init_xavier({2, 32, 32, 32, 1}, ActivationKind::tanh(), 1);
  const auto pts = random_points(1024, 2, 2);
  std::vector<double> dv(1024, 1.0);
  for (auto _ : state) {
    auto grads = backprop_values(net, pts, dv);
    benchmark::DoNotOptimize(grads.layers.data());
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_BackpropValues);
