#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dualpinn/trainer.hpp"
#include "test_helpers.hpp"

using namespace dualpinn;
using dptest::rel_err;

namespace {

// Small desk configs so trainer tests stay fast.
RunConfig tiny_poisson(int e1, int e2) {
  RunConfig c;
  c.problem = "poisson";
  c.nets = "dual_net";
  c.curriculum = e2 > 0 ? "two_phase" : "one_phase";
  c.domain_net.hidden = {12, 12};
  c.boundary_net.hidden = {8};
  c.n_boundary_per_edge = 8;
  c.n_interior_phase1 = 64;
  c.n_interior_phase2 = 64;
  c.phase1_epochs = e1;
  c.phase2_epochs = e2;
  c.patience = 100000;
  c.out_dir = "test_runs";
  return c;
}

RunConfig tiny_sequential(int data_e, int res_e, int joint_e) {
  RunConfig c;
  c.problem = "fokker_planck";
  c.nets = "dual_net";
  c.curriculum = "sequential_fp";
  c.domain_net.hidden = {12, 12};
  c.boundary_net.hidden = {10};
  c.n_interior_phase1 = 64;
  c.n_interior_phase2 = 64;
  c.fp_pseudo_points = 32;
  c.fp_data_epochs = data_e;
  c.fp_residual_epochs = res_e;
  c.fp_joint_epochs = joint_e;
  c.patience = 100000;
  return c;
}

bool same_params(const MlpParams& a, const MlpParams& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l)
    if (a.layers[l].weights != b.layers[l].weights || a.layers[l].biases != b.layers[l].biases)
      return false;
  return true;
}

}  // namespace

TEST_CASE("adam first step moves by about -lr * sign(grad)") {
  MlpParams p;
  p.input_dim = 1;
  p.layers.push_back({1, 1, {0.0}, {0.0}, ActivationKind::linear()});
  AdamState st = make_adam_state(p);
  AdamConfig cfg;
  ParamGrads g = zeros_like(p);
  g.layers[0].weights[0] = 3.7;  // positive gradient
  adam_step(p, g, st, cfg);
  CHECK(p.layers[0].weights[0] == doctest::Approx(-cfg.lr).epsilon(1e-6));
  CHECK(st.step == 1);

  g.layers[0].weights[0] = -0.002;
  MlpParams q;
  q.input_dim = 1;
  q.layers.push_back({1, 1, {0.0}, {0.0}, ActivationKind::linear()});
  AdamState st2 = make_adam_state(q);
  adam_step(q, g, st2, cfg);
  CHECK(q.layers[0].weights[0] == doctest::Approx(cfg.lr).epsilon(1e-4));
}

TEST_CASE("adam with zero gradients leaves parameters; step counter advances") {
  MlpParams p = init_xavier({2, 6, 1}, ActivationKind::tanh(), 3);
  const MlpParams before = p;
  AdamState st = make_adam_state(p);
  adam_step(p, zeros_like(p), st, AdamConfig{});
  CHECK(same_params(p, before));
  CHECK(st.step == 1);

  ParamGrads bad = zeros_like(p);
  bad.layers[0].weights[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adam_step(p, bad, st, AdamConfig{}), TrainingError);
}

TEST_CASE("zero-epoch phases change nothing") {
  RunConfig c = tiny_poisson(0, 0);
  c.curriculum = "two_phase";
  const RunResult r = run_one(c);
  CHECK(r.trace.records.empty());
  CHECK(r.epochs_run == 0);
  // Parameters are exactly the seeded initialization.
  RngStream root(c.seed);
  const MlpParams d0 = init_xavier({2, 12, 12, 1}, ActivationKind::tanh(),
                                   root.derive_seed("init/domain"));
  CHECK(same_params(r.nets.domain, d0));
}

TEST_CASE("alm updates fire exactly every k epochs") {
  RunConfig c = tiny_poisson(200, 0);
  c.alm_update_every = 50;
  c.alm_ramp_every = 100000;
  const RunResult r = run_one(c);
  REQUIRE(r.trace.records.size() == 200);
  int changes = 0;
  double prev = 0.0;  // multipliers start at zero
  for (const auto& rec : r.trace.records) {
    if (rec.lambda_norm != prev) ++changes;
    prev = rec.lambda_norm;
  }
  CHECK(changes == 4);  // epochs 50, 100, 150, 200
}

TEST_CASE("rho ramps on its own schedule and saturates") {
  RunConfig c = tiny_poisson(60, 0);
  c.alm_ramp_every = 20;
  c.alm_rho0 = 1.0;
  c.alm_eta = 2.0;
  c.alm_rho_max = 3.0;
  const RunResult r = run_one(c);
  CHECK(r.trace.records[0].rho == 1.0);
  CHECK(r.trace.records[25].rho == 2.0);
  CHECK(r.trace.records[45].rho == 3.0);  // capped at rho_max
  CHECK(r.trace.records[59].rho == 3.0);
  CHECK(r.alm.front().state.rho == 3.0);
}

TEST_CASE("frozen networks are bitwise invariant across a phase") {
  // All-zero-epoch run returns the raw initialization.
  const RunConfig zero = tiny_sequential(0, 0, 0);
  const RunResult init = run_one(zero);

  // Data phase trains u_B only: u_D must stay bitwise identical.
  const RunConfig data_only = tiny_sequential(20, 0, 0);
  const RunResult after_data = run_one(data_only);
  CHECK(same_params(after_data.nets.domain, init.nets.domain));
  CHECK_FALSE(same_params(*after_data.nets.boundary, *init.nets.boundary));

  // Residual phase trains u_D only: u_B frozen.
  const RunConfig res_only = tiny_sequential(10, 20, 0);
  const RunResult after_res = run_one(res_only);
  const RunConfig data_match = tiny_sequential(10, 0, 0);
  const RunResult data_ref = run_one(data_match);
  CHECK(same_params(*after_res.nets.boundary, *data_ref.nets.boundary));
  CHECK_FALSE(same_params(after_res.nets.domain, data_ref.nets.domain));
}

TEST_CASE("phase2_epochs = 0 reduces to the one-phase run bitwise") {
  RunConfig two = tiny_poisson(40, 0);
  two.curriculum = "two_phase";
  two.phase2_epochs = 0;
  RunConfig one = tiny_poisson(40, 0);
  one.curriculum = "one_phase";
  const RunResult a = run_one(two);
  const RunResult b = run_one(one);
  CHECK(same_params(a.nets.domain, b.nets.domain));
  CHECK(same_params(*a.nets.boundary, *b.nets.boundary));
  CHECK(a.metrics.rel_l2 == b.metrics.rel_l2);
  CHECK(a.metrics.mae == b.metrics.mae);
}

TEST_CASE("identical configs produce bitwise identical runs") {
  const RunConfig c = tiny_poisson(30, 15);
  const RunResult a = run_one(c);
  const RunResult b = run_one(c);
  CHECK(same_params(a.nets.domain, b.nets.domain));
  CHECK(same_params(*a.nets.boundary, *b.nets.boundary));
  CHECK(a.metrics.mae == b.metrics.mae);
  CHECK(a.metrics.rel_l2 == b.metrics.rel_l2);
  CHECK(a.metrics.boundary_l2 == b.metrics.boundary_l2);
  CHECK(a.metrics.pde_residual_l2 == b.metrics.pde_residual_l2);
  REQUIRE(a.trace.records.size() == b.trace.records.size());
  for (std::size_t i = 0; i < a.trace.records.size(); ++i)
    CHECK(a.trace.records[i].loss.total == b.trace.records[i].loss.total);
}

TEST_CASE("early stopping halts and the monitored best is restored") {
  RunConfig c = tiny_poisson(500, 0);
  c.patience = 5;
  c.min_delta = 1e9;  // nothing counts as an improvement after the first epoch
  const RunResult r = run_one(c);
  CHECK(r.epochs_run <= 7);

  // Best-so-far total is nonincreasing along any trace.
  RunConfig c2 = tiny_poisson(60, 0);
  const RunResult r2 = run_one(c2);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& rec : r2.trace.records) {
    CHECK(std::min(best, rec.loss.total) <= best);
    best = std::min(best, rec.loss.total);
  }
}

TEST_CASE("epoch_scale scales every phase budget") {
  RunConfig c = tiny_poisson(100, 50);
  c.epoch_scale = 0.1;
  c.patience = 100000;
  const RunResult r = run_one(c);
  CHECK(r.epochs_run == 10 + 5);
}

TEST_CASE("training aborts carry the partial trace and best parameters") {
  TrainSession s;
  s.problem = PdeProblem::laplace();
  s.config = tiny_poisson(5, 0);
  s.nets.domain = init_xavier({2, 6, 1}, ActivationKind::tanh(), 1);
  s.nets.domain.layers[0].weights[0] = std::numeric_limits<double>::quiet_NaN();
  s.adam_domain = make_adam_state(s.nets.domain);
  s.rng = RngStream(1);

  PhasePlan plan;
  plan.name = PhaseName::Phase1;
  plan.epochs = 5;
  plan.n_interior = 16;
  plan.use_alm = plan.use_role = false;

  bool caught = false;
  try {
    train_phase(s, plan, EarlyStopConfig{});
  } catch (const TrainingAbort& abort) {
    caught = true;
    CHECK(std::string(abort.what()).find("physics") != std::string::npos);
    CHECK(abort.partial_trace.records.empty());  // died on the first epoch
  }
  CHECK(caught);
}

TEST_CASE("checkpoints round-trip bitwise") {
  const RunConfig c = tiny_poisson(10, 5);
  const RunResult r = run_one(c);
  const std::string path = "test_checkpoint_roundtrip.json";
  save_checkpoint(path, Checkpoint{r.nets, r.alm, r.epochs_run});
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.epoch == r.epochs_run);
  CHECK(same_params(back.nets.domain, r.nets.domain));
  REQUIRE(back.nets.boundary.has_value());
  CHECK(same_params(*back.nets.boundary, *r.nets.boundary));
  REQUIRE(back.alm.size() == r.alm.size());
  for (std::size_t i = 0; i < back.alm.size(); ++i) {
    CHECK(back.alm[i].label == r.alm[i].label);
    CHECK(back.alm[i].state.lambdas == r.alm[i].state.lambdas);
    CHECK(back.alm[i].state.rho == r.alm[i].state.rho);
  }
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_checkpoint("no_such_checkpoint.json"), ConfigError);
}

TEST_CASE("one-net mode trains a single network") {
  RunConfig c = tiny_poisson(20, 0);
  c.nets = "one_net";
  c.curriculum = "one_phase";
  const RunResult r = run_one(c);
  CHECK_FALSE(r.nets.boundary.has_value());
  for (const auto& rec : r.trace.records) CHECK(rec.loss.role == 0.0);
}

TEST_CASE("sequential protocol runs all three phases in order") {
  const RunConfig c = tiny_sequential(8, 6, 4);
  const RunResult r = run_one(c);
  REQUIRE(r.trace.records.size() == 18);
  CHECK(r.trace.records[0].phase == PhaseName::FPData);
  CHECK(r.trace.records[8].phase == PhaseName::FPResidual);
  CHECK(r.trace.records[14].phase == PhaseName::FPJoint);
  CHECK(r.trace.records[0].loss.data > 0.0);
  CHECK(r.trace.records[8].loss.physics > 0.0);
  CHECK(r.trace.records[14].loss.role >= 0.0);
  // No ALM constraint sets in the sequential protocol.
  CHECK(r.alm.empty());
}

TEST_CASE("wave runs carry three constraint sets") {
  RunConfig c;
  c.problem = "wave";
  c.nets = "dual_net";
  c.curriculum = "one_phase";
  c.domain_net.hidden = {10, 10};
  c.boundary_net.hidden = {8};
  c.n_boundary_per_edge = 8;
  c.n_initial = 16;
  c.n_interior_phase1 = 48;
  c.phase1_epochs = 10;
  c.patience = 100000;
  const RunResult r = run_one(c);
  REQUIRE(r.alm.size() == 3);
  CHECK(r.alm[0].label == "bc");
  CHECK(r.alm[1].label == "ic");
  CHECK(r.alm[2].label == "ic_t");
  CHECK(r.alm[1].state.lambdas.size() == 16);
}
