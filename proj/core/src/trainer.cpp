#include "dualpinn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "dualpinn/parallel.hpp"

namespace dualpinn {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int scaled_epochs(int epochs, double scale) {
  if (epochs <= 0) return 0;
  return std::max(1, static_cast<int>(std::llround(epochs * scale)));
}

struct JetBatch {
  std::vector<double> pts;
  std::vector<JetCotangent> cots;

  void add(std::span<const double> coords, std::span<const JetCotangent> c, double weight) {
    pts.insert(pts.end(), coords.begin(), coords.end());
    for (const auto& cot : c) {
      JetCotangent w = cot;
      w.d_value *= weight;
      for (auto& g : w.d_grad) g *= weight;
      for (auto& h : w.d_hess_diag) h *= weight;
      cots.push_back(std::move(w));
    }
  }
};

struct ValBatch {
  std::vector<double> pts;
  std::vector<double> dv;

  void add(std::span<const double> coords, std::span<const double> d, double weight) {
    pts.insert(pts.end(), coords.begin(), coords.end());
    for (double v : d) dv.push_back(weight * v);
  }
};

ParamGrads gradient_of(const MlpParams& net, const JetBatch& jb, const ValBatch& vb) {
  ParamGrads g = zeros_like(net);
  if (!jb.cots.empty()) g = backprop_jets(net, jb.pts, jb.cots);
  if (!vb.dv.empty()) accumulate(g, backprop_values(net, vb.pts, vb.dv));
  return g;
}

PointSet grid_points(const Domain& domain, int n) {
  PointSet ps;
  ps.dim = domain.dim();
  ps.tag = PointTag::Interior;
  if (domain.dim() == 1) {
    for (int i = 0; i < n; ++i)
      ps.coords.push_back(domain.lo[0] +
                          (domain.hi[0] - domain.lo[0]) * (i + 0.5) / static_cast<double>(n));
  } else {
    const int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    for (int i = 0; i < m && static_cast<int>(ps.size()) < n; ++i) {
      const double x =
          domain.lo[0] + (domain.hi[0] - domain.lo[0]) * (i + 0.5) / static_cast<double>(m);
      for (int j = 0; j < m && static_cast<int>(ps.size()) < n; ++j) {
        ps.coords.push_back(x);
        ps.coords.push_back(domain.lo[1] +
                            (domain.hi[1] - domain.lo[1]) * (j + 0.5) / static_cast<double>(m));
      }
    }
  }
  return ps;
}

PointSet concat(PointSet a, const PointSet& b) {
  a.coords.insert(a.coords.end(), b.coords.begin(), b.coords.end());
  return a;
}

}  // namespace

const char* phase_label(PhaseName name) {
  switch (name) {
    case PhaseName::Warmup:
      return "warmup";
    case PhaseName::Phase1:
      return "phase1";
    case PhaseName::Phase2:
      return "phase2";
    case PhaseName::FPData:
      return "fp_data";
    case PhaseName::FPResidual:
      return "fp_residual";
    case PhaseName::FPJoint:
    default:
      return "fp_joint";
  }
}

AdamState make_adam_state(const MlpParams& params) {
  AdamState s;
  s.m = zeros_like(params);
  s.v = zeros_like(params);
  return s;
}

void adam_step(MlpParams& params, const ParamGrads& grads, AdamState& state,
               const AdamConfig& config) {
  if (grads.layers.size() != params.layers.size())
    throw ContractViolation("adam_step: gradient/parameter shape mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));

  auto update = [&](std::vector<double>& x, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    if (g.size() != x.size()) throw ContractViolation("adam_step: layer shape mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(g[i])) throw TrainingError("non-finite gradient in adam_step");
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      x[i] -= config.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + config.eps);
    }
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weights, grads.layers[l].weights, state.m.layers[l].weights,
           state.v.layers[l].weights);
    update(params.layers[l].biases, grads.layers[l].biases, state.m.layers[l].biases,
           state.v.layers[l].biases);
  }
}

PdeProblem make_problem(const RunConfig& c) {
  if (c.problem == "fokker_planck")
    return PdeProblem::fokker_planck(c.fp_a, c.fp_b, c.fp_sigma, c.fp_dx,
                                     Domain::interval(c.fp_xmin, c.fp_xmax));
  if (c.problem == "laplace") return PdeProblem::laplace();
  if (c.problem == "poisson") return PdeProblem::poisson();
  if (c.problem == "wave") return PdeProblem::wave(c.wave_c);
  throw ConfigError("unknown problem kind '" + c.problem + "'");
}

double effective_ring_delta(const RunConfig& config, const PdeProblem& problem) {
  return config.ring_delta > 0.0 ? config.ring_delta : 0.1 * problem.domain.diameter();
}

double effective_role_tau(const RunConfig& config, const PdeProblem& problem) {
  return config.role_tau > 0.0 ? config.role_tau : 0.1 * problem.domain.diameter();
}

namespace {

TrainSession make_session(const PdeProblem& problem, const RunConfig& config) {
  TrainSession s;
  s.problem = problem;
  s.config = config;
  s.rng = RngStream(config.seed);

  auto dims_of = [&](const NetSpec& spec) {
    std::vector<int> dims;
    dims.push_back(problem.dim());
    dims.insert(dims.end(), spec.hidden.begin(), spec.hidden.end());
    dims.push_back(1);
    return dims;
  };
  auto build_net = [&](const NetSpec& spec, const char* site) {
    const std::uint64_t seed = s.rng.derive_seed(site);
    if (spec.activation == "sine") return init_siren(dims_of(spec), spec.omega0, seed);
    return init_xavier(dims_of(spec), ActivationKind::tanh(), seed);
  };
  s.nets.domain = build_net(config.domain_net, "init/domain");
  s.adam_domain = make_adam_state(s.nets.domain);
  if (config.nets == "dual_net") {
    s.nets.boundary = build_net(config.boundary_net, "init/boundary");
    s.adam_boundary = make_adam_state(*s.nets.boundary);
  }

  if (problem.kind == PdeProblem::Kind::FokkerPlanck) {
    s.fp_norm_grid = fp_grid(problem);
    s.fp_endpoints = {problem.domain.lo[0], problem.domain.hi[0]};
  }
  return s;
}

AlmState alm_from_config(const RunConfig& c, std::size_t n) {
  return make_alm_state(n, c.alm_rho0, c.alm_lambda_max, c.alm_eta, c.alm_rho_max,
                        c.alm_update_every, c.alm_ramp_every);
}

// Boundary (and wave initial) constraint sets, sampled once per run so the
// multipliers stay point-aligned across phases.
void build_constraints(TrainSession& s) {
  const PdeProblem& p = s.problem;
  const RunConfig& c = s.config;
  RngStream rb = s.rng.fork("sample/boundary");

  switch (p.kind) {
    case PdeProblem::Kind::FokkerPlanck: {
      ConstraintSet bc;
      bc.label = "bc";
      bc.points.dim = 1;
      bc.points.tag = PointTag::Boundary;
      bc.points.coords = {p.domain.lo[0], p.domain.hi[0]};
      for (std::size_t i = 0; i < bc.points.size(); ++i)
        bc.targets.push_back(boundary_value(p, bc.points.point(i)));
      bc.alm = alm_from_config(c, bc.points.size());
      s.constraints.push_back(std::move(bc));
      break;
    }
    case PdeProblem::Kind::Laplace:
    case PdeProblem::Kind::Poisson: {
      ConstraintSet bc;
      bc.label = "bc";
      bc.points = sample_lhs_edges(p.domain, static_cast<std::size_t>(c.n_boundary_per_edge), rb);
      for (std::size_t i = 0; i < bc.points.size(); ++i)
        bc.targets.push_back(boundary_value(p, bc.points.point(i)));
      bc.alm = alm_from_config(c, bc.points.size());
      s.constraints.push_back(std::move(bc));
      break;
    }
    case PdeProblem::Kind::Wave: {
      ConstraintSet bc;
      bc.label = "bc";
      bc.points = sample_lhs_faces(p.domain, static_cast<std::size_t>(c.n_boundary_per_edge), rb);
      bc.targets.assign(bc.points.size(), 0.0);
      bc.alm = alm_from_config(c, bc.points.size());
      s.constraints.push_back(std::move(bc));

      RngStream ri = s.rng.fork("sample/initial");
      PointSet ic_pts = sample_initial(p.domain, static_cast<std::size_t>(c.n_initial), ri);

      ConstraintSet ic;
      ic.label = "ic";
      ic.points = ic_pts;
      for (std::size_t i = 0; i < ic.points.size(); ++i)
        ic.targets.push_back(initial_value(p, ic.points.point(i)).u);
      ic.alm = alm_from_config(c, ic.points.size());
      s.constraints.push_back(std::move(ic));

      ConstraintSet ict;
      ict.label = "ic_t";
      ict.channel = ConstraintSet::Channel::TimeDerivative;
      ict.points = std::move(ic_pts);
      ict.targets.assign(ict.points.size(), 0.0);
      ict.alm = alm_from_config(c, ict.points.size());
      s.constraints.push_back(std::move(ict));
      break;
    }
  }
}

void build_pseudo_data(TrainSession& s) {
  RngStream rd = s.rng.fork("sample/fp_data");
  PointSet pts =
      sample_uniform(s.problem.domain, static_cast<std::size_t>(s.config.fp_pseudo_points), rd);
  s.pseudo_points = pts.coords;
  s.pseudo_targets.clear();
  for (std::size_t i = 0; i < pts.size(); ++i)
    s.pseudo_targets.push_back(exact_u(s.problem, pts.point(i)));
}

}  // namespace

TrainTrace train_phase(TrainSession& s, const PhasePlan& plan, const EarlyStopConfig& stop) {
  TrainTrace trace;
  if (plan.epochs <= 0) return trace;
  if (!plan.train_domain && !plan.train_boundary)
    throw ConfigError("train_phase: a nonzero-epoch phase needs a trainable network");

  const PdeProblem& prob = s.problem;
  const RunConfig& cfg = s.config;
  const std::size_t dim = static_cast<std::size_t>(prob.dim());
  const bool dual = s.nets.boundary.has_value();
  const bool train_b = plan.train_boundary && dual;
  const AdamConfig adam_cfg{cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps};

  const double ring_delta = effective_ring_delta(cfg, prob);
  const RolePriorConfig role_cfg{effective_role_tau(cfg, prob), cfg.role_alpha_int,
                                 cfg.role_alpha_bd, cfg.role_boundary_term};
  const ModalPriorConfig modal_cfg{cfg.modal_modes, cfg.modal_weight, cfg.modal_quad_points,
                                   cfg.modal_time_samples};
  const int sched_T = plan.schedule_total > 0 ? plan.schedule_total : plan.epochs;
  const GammaSchedule gamma_sched{cfg.gamma_min, cfg.gamma_max, sched_T};
  const GammaSchedule wbc_sched{cfg.wbc_min, cfg.wbc_max, sched_T};

  RngStream sampler_rng = s.rng.fork(std::string("sample/interior/") + phase_label(plan.name));

  PointSet interior;
  std::vector<double> interior_dists;
  auto resample_interior = [&]() {
    switch (plan.sampler) {
      case SamplerKind::Uniform:
        interior = sample_uniform(prob.domain, static_cast<std::size_t>(plan.n_interior),
                                  sampler_rng);
        break;
      case SamplerKind::RingMix: {
        const auto n = static_cast<std::size_t>(plan.n_interior);
        const auto n_ring =
            std::min(n, static_cast<std::size_t>(std::llround(n * cfg.ring_fraction)));
        const std::size_t n_uni = n - n_ring;
        PointSet pts;
        pts.dim = static_cast<int>(dim);
        if (n_ring > 0) pts = sample_ring(prob.domain, n_ring, ring_delta, sampler_rng);
        if (n_uni > 0) pts = concat(std::move(pts), sample_uniform(prob.domain, n_uni, sampler_rng));
        interior = std::move(pts);
        break;
      }
      case SamplerKind::Grid:
        interior = grid_points(prob.domain, plan.n_interior);
        break;
      case SamplerKind::BoundaryOnly:
        interior = PointSet{static_cast<int>(dim), PointTag::Interior, {}};
        break;
    }
    interior_dists.clear();
    for (std::size_t i = 0; i < interior.size(); ++i)
      interior_dists.push_back(distance_to_boundary(prob.domain, interior.point(i)));
  };

  double best_total = std::numeric_limits<double>::infinity();
  DualNets best_nets = s.nets;
  bool have_best = false;
  int epochs_since_improve = 0;

  for (int epoch = 0; epoch < plan.epochs; ++epoch) {
    const auto t0 = Clock::now();
    try {
      const bool need_sample =
          epoch == 0 || (plan.resample_every > 0 && epoch % plan.resample_every == 0);
      if (need_sample && plan.sampler != SamplerKind::BoundaryOnly) resample_interior();
      if (epoch == 0 && plan.sampler == SamplerKind::BoundaryOnly) resample_interior();

      // Schedule values for this epoch.
      const double t = static_cast<double>(plan.schedule_offset + epoch);
      double gamma_t;
      if (plan.role_weight_override >= 0.0)
        gamma_t = plan.role_weight_override;
      else if (!cfg.anneal_gamma)
        gamma_t = cfg.gamma_max;  // fixed-gamma ablation
      else if (plan.anneal)
        gamma_t = gamma(gamma_sched, t);
      else
        gamma_t = cfg.gamma_max;
      const double wbc_t = plan.anneal ? gamma(wbc_sched, t) : cfg.wbc_max;

      LossBreakdown bd;
      bd.gamma_weight = plan.use_role ? gamma_t : 0.0;
      bd.wbc_weight = wbc_t;
      bd.modal_weight = cfg.modal_weight;
      bd.norm_weight = cfg.fp_norm_weight;
      bd.data_weight = cfg.fp_data_weight;
      bd.pinning_weight = cfg.fp_pinning_weight;

      JetBatch jet_d, jet_b;
      ValBatch val_d, val_b;

      // Shared physics residual over the interior batch.
      std::vector<Jet2> jets_d, jets_b;
      if (plan.use_physics && interior.size() > 0) {
        jets_d = forward_jets(s.nets.domain, interior.coords);
        if (dual) jets_b = forward_jets(*s.nets.boundary, interior.coords);
        PhysicsLoss pl = physics_loss(prob, interior.coords, jets_d, jets_b);
        bd.physics = pl.value;
        if (plan.train_domain) jet_d.add(interior.coords, pl.cotangents, 1.0);
        if (train_b) jet_b.add(interior.coords, pl.cotangents, 1.0);
      }

      // Role priors on the same interior points.
      const bool role_active = plan.use_role && cfg.role_priors && dual && interior.size() > 0 &&
                               !jets_d.empty();
      if (role_active) {
        std::vector<double> u_d(interior.size()), u_b(interior.size());
        for (std::size_t i = 0; i < interior.size(); ++i) {
          u_d[i] = jets_d[i].value;
          u_b[i] = jets_b[i].value;
        }
        RoleLoss rl = role_loss(interior_dists, u_d, u_b, role_cfg);
        bd.role = rl.value;
        if (plan.train_domain) val_d.add(interior.coords, rl.d_u_domain, gamma_t);
        if (train_b) val_b.add(interior.coords, rl.d_u_boundary, gamma_t);
      }

      // ALM constraint sets.
      if (plan.use_alm) {
        for (auto& cs : s.constraints) {
          const std::size_t n = cs.points.size();
          std::vector<double> c(n);
          if (cs.channel == ConstraintSet::Channel::Value) {
            std::vector<double> vd = forward_values(s.nets.domain, cs.points.coords);
            std::vector<double> vb;
            if (dual) vb = forward_values(*s.nets.boundary, cs.points.coords);
            for (std::size_t i = 0; i < n; ++i)
              c[i] = vd[i] + (dual ? vb[i] : 0.0) - cs.targets[i];
            cs.last_violation = c;
            AlmPenalty ap = alm_penalty(cs.alm, c);
            bd.alm_sets.push_back(ap.value);
            if (plan.train_domain) val_d.add(cs.points.coords, ap.d_violation, wbc_t);
            if (train_b) val_b.add(cs.points.coords, ap.d_violation, wbc_t);

            // Optional third role term: u_B energy on the boundary itself.
            if (cs.label == "bc" && role_active && role_cfg.boundary_term) {
              std::vector<double> d_ub;
              const double extra = role_cfg.alpha_bd * mse_loss(vb, std::vector<double>(n, 0.0),
                                                                &d_ub);
              bd.role += extra;
              if (train_b) val_b.add(cs.points.coords, d_ub, gamma_t * role_cfg.alpha_bd);
            }
          } else {
            // Time-derivative channel: violation reads grad[1] of the sum.
            std::vector<Jet2> jd = forward_jets(s.nets.domain, cs.points.coords);
            std::vector<Jet2> jb;
            if (dual) jb = forward_jets(*s.nets.boundary, cs.points.coords);
            for (std::size_t i = 0; i < n; ++i)
              c[i] = jd[i].grad[1] + (dual ? jb[i].grad[1] : 0.0) - cs.targets[i];
            cs.last_violation = c;
            AlmPenalty ap = alm_penalty(cs.alm, c);
            bd.alm_sets.push_back(ap.value);
            std::vector<JetCotangent> cots(n);
            for (std::size_t i = 0; i < n; ++i) {
              cots[i].d_grad.assign(dim, 0.0);
              cots[i].d_grad[1] = ap.d_violation[i];
            }
            if (plan.train_domain) jet_d.add(cs.points.coords, cots, wbc_t);
            if (train_b) jet_b.add(cs.points.coords, cots, wbc_t);
          }
        }
      }

      // Modal trajectory prior (wave).
      if (plan.use_modal) {
        ModalLoss ml = modal_prior_loss(
            prob,
            [&](double x, double tt) {
              const double pt[2] = {x, tt};
              double v = forward_value(s.nets.domain, {pt, 2});
              if (dual) v += forward_value(*s.nets.boundary, {pt, 2});
              return v;
            },
            modal_cfg);
        bd.modal = ml.value;
        if (plan.train_domain) val_d.add(ml.node_coords, ml.d_value, cfg.modal_weight);
        if (train_b) val_b.add(ml.node_coords, ml.d_value, cfg.modal_weight);
      }

      // Fokker-Planck mass normalization penalty.
      if (plan.use_normalization) {
        std::vector<double> vd = forward_values(s.nets.domain, s.fp_norm_grid);
        std::vector<double> vsum = vd;
        if (dual) {
          std::vector<double> vb = forward_values(*s.nets.boundary, s.fp_norm_grid);
          for (std::size_t i = 0; i < vsum.size(); ++i) vsum[i] += vb[i];
        }
        const double mass = fp_mass(vsum, prob.fp_dx);
        bd.normalization = fp_constraint_loss(mass);
        const double dmass = 2.0 * (mass - 1.0) * prob.fp_dx;
        std::vector<double> dv(vsum.size(), dmass);
        if (plan.train_domain) val_d.add(s.fp_norm_grid, dv, cfg.fp_norm_weight);
        if (train_b) val_b.add(s.fp_norm_grid, dv, cfg.fp_norm_weight);
      }

      // Pseudo-measurement data loss on u_B alone.
      if (plan.use_data && dual) {
        std::vector<double> vb = forward_values(*s.nets.boundary, s.pseudo_points);
        std::vector<double> d_ub;
        bd.data = data_loss(vb, s.pseudo_targets, &d_ub);
        if (train_b) val_b.add(s.pseudo_points, d_ub, cfg.fp_data_weight);
      }

      // Pinning of u_D at the interval endpoints.
      if (plan.use_pinning) {
        std::vector<double> vd = forward_values(s.nets.domain, s.fp_endpoints);
        std::vector<double> d_ud;
        bd.pinning = pinning_loss(vd, &d_ud);
        if (plan.train_domain) val_d.add(s.fp_endpoints, d_ud, cfg.fp_pinning_weight);
      }

      // Boundary warm-up (Phase 0): plain MSE on the bc constraint set.
      if (plan.use_warmup && !s.constraints.empty()) {
        const ConstraintSet& bc = s.constraints.front();
        std::vector<double> vsum = forward_values(s.nets.domain, bc.points.coords);
        if (dual) {
          std::vector<double> vb = forward_values(*s.nets.boundary, bc.points.coords);
          for (std::size_t i = 0; i < vsum.size(); ++i) vsum[i] += vb[i];
        }
        std::vector<double> d_u;
        bd.warmup = warmup_loss(vsum, bc.targets, &d_u);
        if (plan.train_domain) val_d.add(bc.points.coords, d_u, 1.0);
        if (train_b) val_b.add(bc.points.coords, d_u, 1.0);
      }

      total_loss(bd);

      // Backprop and parameter updates for the trainable subset.
      if (plan.train_domain && (!jet_d.cots.empty() || !val_d.dv.empty()))
        adam_step(s.nets.domain, gradient_of(s.nets.domain, jet_d, val_d), s.adam_domain,
                  adam_cfg);
      if (train_b && (!jet_b.cots.empty() || !val_b.dv.empty()))
        adam_step(*s.nets.boundary, gradient_of(*s.nets.boundary, jet_b, val_b), s.adam_boundary,
                  adam_cfg);

      // Multiplier / penalty schedules.
      if (plan.use_alm && cfg.alm_multiplier_updates) {
        for (auto& cs : s.constraints) {
          if ((epoch + 1) % cs.alm.update_every == 0 && !cs.last_violation.empty())
            alm_update(cs.alm, cs.last_violation);
          if ((epoch + 1) % cs.alm.ramp_every == 0) rho_ramp(cs.alm);
        }
      }

      EpochRecord rec;
      rec.epoch = epoch;
      rec.phase = plan.name;
      rec.loss = bd;
      rec.rho = s.constraints.empty() ? 0.0 : s.constraints.front().alm.rho;
      double lam2 = 0.0;
      for (const auto& cs : s.constraints)
        for (double l : cs.alm.lambdas) lam2 += l * l;
      rec.lambda_norm = std::sqrt(lam2);
      if (cfg.trace_validation_every > 0 &&
          (epoch % cfg.trace_validation_every == 0 || epoch + 1 == plan.epochs))
        rec.validation_rel_l2 = validation_rel_l2(s.nets, prob);
      rec.wall_ms = ms_since(t0);
      trace.records.push_back(std::move(rec));

      // Best-so-far bookkeeping for early stopping.
      if (bd.total < best_total - stop.min_delta) {
        best_total = bd.total;
        best_nets = s.nets;
        have_best = true;
        epochs_since_improve = 0;
      } else {
        ++epochs_since_improve;
      }
      if (epochs_since_improve >= stop.patience) break;
    } catch (const TrainingError& e) {
      throw TrainingAbort(std::string(e.what()) + " (" + phase_label(plan.name) + " epoch " +
                              std::to_string(epoch) + ")",
                          have_best ? best_nets : s.nets, std::move(trace));
    }
  }

  if (stop.restore_best && have_best) s.nets = best_nets;
  return trace;
}

namespace {

RunResult finish_run(TrainSession& s, TrainTrace trace, double wall_s) {
  RunResult r;
  r.nets = s.nets;
  r.trace = std::move(trace);
  r.epochs_run = static_cast<int>(r.trace.records.size());
  r.metrics = evaluate(r.nets, s.problem);
  r.metrics.seed = s.config.seed;
  r.metrics.config_fingerprint = config_fingerprint(s.config);
  r.metrics.epochs_run = r.epochs_run;
  r.metrics.wall_clock_s = wall_s;
  for (const auto& cs : s.constraints) r.alm.push_back({cs.label, cs.alm});
  r.wall_seconds = wall_s;
  return r;
}

TrainTrace run_phases(TrainSession& s, const std::vector<PhasePlan>& plans,
                      const EarlyStopConfig& stop) {
  TrainTrace all;
  for (const auto& plan : plans) {
    try {
      TrainTrace t = train_phase(s, plan, stop);
      all.records.insert(all.records.end(), t.records.begin(), t.records.end());
    } catch (TrainingAbort& abort) {
      TrainTrace combined = std::move(all);
      combined.records.insert(combined.records.end(), abort.partial_trace.records.begin(),
                              abort.partial_trace.records.end());
      throw TrainingAbort(abort.what(), std::move(abort.best_nets), std::move(combined));
    }
  }
  return all;
}

}  // namespace

RunResult run_protocol(const PdeProblem& problem, const RunConfig& config) {
  config.validate();
  if (config.curriculum == "sequential_fp")
    throw ConfigError("run_protocol: use run_sequential_fp for the sequential curriculum");

  const auto t0 = Clock::now();
  TrainSession s = make_session(problem, config);
  build_constraints(s);

  const bool dual = config.nets == "dual_net";
  const bool fp = problem.kind == PdeProblem::Kind::FokkerPlanck;
  const bool modal = config.modal_enabled && problem.kind == PdeProblem::Kind::Wave;
  const int e0 = scaled_epochs(config.warmup_epochs, config.epoch_scale);
  const int e1 = scaled_epochs(config.phase1_epochs, config.epoch_scale);
  const int e2 = config.curriculum == "two_phase"
                     ? scaled_epochs(config.phase2_epochs, config.epoch_scale)
                     : 0;
  const EarlyStopConfig stop{config.patience, config.min_delta, config.restore_best};

  std::vector<PhasePlan> plans;
  if (e0 > 0) {
    PhasePlan p;
    p.name = PhaseName::Warmup;
    p.epochs = e0;
    p.sampler = SamplerKind::BoundaryOnly;
    p.use_physics = p.use_alm = p.use_role = false;
    p.use_warmup = true;
    plans.push_back(p);
  }
  {
    PhasePlan p;
    p.name = PhaseName::Phase1;
    p.epochs = e1;
    p.sampler = SamplerKind::Uniform;
    p.n_interior = config.n_interior_phase1;
    p.resample_every = config.resample_every;
    p.use_role = dual && config.role_priors;
    p.use_modal = modal;
    p.use_normalization = fp;
    if (config.phase1_constant_schedules) {
      p.anneal = false;
    } else {
      p.anneal = true;
      p.schedule_offset = 0;
      p.schedule_total = e1 + e2;
    }
    plans.push_back(p);
  }
  if (e2 > 0) {
    PhasePlan p;
    p.name = PhaseName::Phase2;
    p.epochs = e2;
    p.sampler = config.ring_phase2 ? SamplerKind::RingMix : SamplerKind::Uniform;
    p.n_interior = config.n_interior_phase2;
    p.resample_every = config.resample_every;
    p.use_role = dual && config.role_priors;
    p.use_modal = modal;
    p.use_normalization = fp;
    p.anneal = true;
    if (!config.phase1_constant_schedules) {
      p.schedule_offset = e1;
      p.schedule_total = e1 + e2;
    }
    plans.push_back(p);
  }

  TrainTrace all = run_phases(s, plans, stop);
  return finish_run(s, std::move(all), ms_since(t0) / 1000.0);
}

RunResult run_sequential_fp(const RunConfig& config) {
  config.validate();
  if (config.curriculum != "sequential_fp")
    throw ConfigError("run_sequential_fp: curriculum must be sequential_fp");
  const PdeProblem problem = make_problem(config);

  const auto t0 = Clock::now();
  TrainSession s = make_session(problem, config);
  build_pseudo_data(s);
  const EarlyStopConfig stop{config.patience, config.min_delta, config.restore_best};

  std::vector<PhasePlan> plans;
  {
    PhasePlan p;  // data prior: u_B alone regresses the pseudo-measurements
    p.name = PhaseName::FPData;
    p.epochs = scaled_epochs(config.fp_data_epochs, config.epoch_scale);
    p.sampler = SamplerKind::BoundaryOnly;
    p.train_domain = false;
    p.use_physics = p.use_alm = p.use_role = false;
    p.use_data = true;
    plans.push_back(p);
  }
  {
    PhasePlan p;  // physics residual: u_B frozen
    p.name = PhaseName::FPResidual;
    p.epochs = scaled_epochs(config.fp_residual_epochs, config.epoch_scale);
    p.sampler = SamplerKind::Uniform;
    p.n_interior = config.n_interior_phase1;
    p.resample_every = config.resample_every;
    p.train_boundary = false;
    p.use_alm = p.use_role = false;
    p.use_normalization = true;
    p.use_pinning = true;
    plans.push_back(p);
  }
  {
    PhasePlan p;  // joint fine-tune with a mild role prior
    p.name = PhaseName::FPJoint;
    p.epochs = scaled_epochs(config.fp_joint_epochs, config.epoch_scale);
    p.sampler = SamplerKind::Uniform;
    p.n_interior = config.n_interior_phase2;
    p.resample_every = config.resample_every;
    p.use_alm = false;
    p.use_role = true;
    p.role_weight_override = config.fp_joint_role_weight;
    p.use_normalization = true;
    p.use_data = true;
    plans.push_back(p);
  }

  TrainTrace all = run_phases(s, plans, stop);
  return finish_run(s, std::move(all), ms_since(t0) / 1000.0);
}

RunResult run_one(const RunConfig& config) {
  if (config.curriculum == "sequential_fp") return run_sequential_fp(config);
  return run_protocol(make_problem(config), config);
}

namespace {

using nlohmann::json;

json activation_to_json(const ActivationKind& a) {
  switch (a.kind) {
    case ActivationKind::Kind::Tanh:
      return {{"kind", "tanh"}};
    case ActivationKind::Kind::Sine:
      return {{"kind", "sine"}, {"omega0", a.omega0}};
    case ActivationKind::Kind::Linear:
    default:
      return {{"kind", "linear"}};
  }
}

ActivationKind activation_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "tanh") return ActivationKind::tanh();
  if (kind == "sine") return ActivationKind::sine(j.at("omega0").get<double>());
  if (kind == "linear") return ActivationKind::linear();
  throw ConfigError("checkpoint: unknown activation kind '" + kind + "'");
}

json net_to_json(const MlpParams& p) {
  json layers = json::array();
  for (const auto& l : p.layers)
    layers.push_back({{"in", l.in},
                      {"out", l.out},
                      {"activation", activation_to_json(l.activation)},
                      {"weights", l.weights},
                      {"biases", l.biases}});
  return {{"input_dim", p.input_dim}, {"layers", layers}};
}

MlpParams net_from_json(const json& j) {
  MlpParams p;
  p.input_dim = j.at("input_dim").get<int>();
  for (const auto& lj : j.at("layers")) {
    Layer l;
    l.in = lj.at("in").get<int>();
    l.out = lj.at("out").get<int>();
    l.activation = activation_from_json(lj.at("activation"));
    l.weights = lj.at("weights").get<std::vector<double>>();
    l.biases = lj.at("biases").get<std::vector<double>>();
    if (l.weights.size() != static_cast<std::size_t>(l.in) * l.out ||
        l.biases.size() != static_cast<std::size_t>(l.out))
      throw ConfigError("checkpoint: layer shape mismatch");
    p.layers.push_back(std::move(l));
  }
  return p;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  json j;
  j["format"] = "dualpinn-checkpoint";
  j["version"] = 1;
  j["epoch"] = ck.epoch;
  j["domain"] = net_to_json(ck.nets.domain);
  j["boundary"] = ck.nets.boundary ? net_to_json(*ck.nets.boundary) : json(nullptr);
  json alm = json::array();
  for (const auto& a : ck.alm)
    alm.push_back({{"label", a.label},
                   {"rho", a.state.rho},
                   {"lambda_max", a.state.lambda_max},
                   {"eta", a.state.eta},
                   {"rho_max", a.state.rho_max},
                   {"update_every", a.state.update_every},
                   {"ramp_every", a.state.ramp_every},
                   {"lambdas", a.state.lambdas}});
  j["alm"] = alm;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint: " + path);
  out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (j.value("format", "") != "dualpinn-checkpoint")
    throw ConfigError(path + ": not a dualpinn checkpoint");
  if (j.value("version", 0) != 1) throw ConfigError(path + ": unsupported checkpoint version");

  Checkpoint ck;
  ck.epoch = j.at("epoch").get<int>();
  ck.nets.domain = net_from_json(j.at("domain"));
  if (!j.at("boundary").is_null()) ck.nets.boundary = net_from_json(j.at("boundary"));
  for (const auto& aj : j.at("alm")) {
    AlmSnapshot snap;
    snap.label = aj.at("label").get<std::string>();
    snap.state.rho = aj.at("rho").get<double>();
    snap.state.lambda_max = aj.at("lambda_max").get<double>();
    snap.state.eta = aj.at("eta").get<double>();
    snap.state.rho_max = aj.at("rho_max").get<double>();
    snap.state.update_every = aj.at("update_every").get<int>();
    snap.state.ramp_every = aj.at("ramp_every").get<int>();
    snap.state.lambdas = aj.at("lambdas").get<std::vector<double>>();
    ck.alm.push_back(std::move(snap));
  }
  return ck;
}

}  // namespace dualpinn
