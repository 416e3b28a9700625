#include "dualpinn/objective.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "dualpinn/errors.hpp"

namespace dualpinn {

namespace {
constexpr double kPi = std::numbers::pi;
}

AlmState make_alm_state(std::size_t n_points, double rho0, double lambda_max, double eta,
                        double rho_max, int update_every, int ramp_every) {
  if (!(rho0 > 0.0) || !(rho_max > 0.0) || !(lambda_max > 0.0))
    throw ConfigError("alm: rho0, rho_max and Lambda must be positive");
  if (eta < 1.0) throw ConfigError("alm: eta must be >= 1");
  if (update_every < 1 || ramp_every < 1)
    throw ConfigError("alm: update and ramp periods must be >= 1");
  AlmState s;
  s.lambdas.assign(n_points, 0.0);
  s.rho = rho0;
  s.lambda_max = lambda_max;
  s.eta = eta;
  s.rho_max = rho_max;
  s.update_every = update_every;
  s.ramp_every = ramp_every;
  return s;
}

double boundary_weight(double d, double tau) {
  if (d < 0.0) throw ContractViolation("boundary_weight: distance must be >= 0");
  if (!(tau > 0.0)) throw ContractViolation("boundary_weight: tau must be > 0");
  return std::exp(-d / tau);
}

double gamma(const GammaSchedule& schedule, double t) {
  const double T = static_cast<double>(schedule.total_epochs);
  if (t < 0.0 || t > T) {
    std::fprintf(stderr, "warning: gamma schedule evaluated at t=%g outside [0, %g]; clamping\n",
                 t, T);
    t = std::clamp(t, 0.0, T);
  }
  // Endpoints and midpoint are pinned exactly.
  if (t == 0.0) return schedule.gamma_max;
  if (t == T) return schedule.gamma_min;
  if (2.0 * t == T) return 0.5 * (schedule.gamma_min + schedule.gamma_max);
  return schedule.gamma_min +
         0.5 * (schedule.gamma_max - schedule.gamma_min) * (1.0 + std::cos(kPi * t / T));
}

PhysicsLoss physics_loss(const PdeProblem& problem, std::span<const double> points,
                         std::span<const Jet2> jets_domain, std::span<const Jet2> jets_boundary) {
  const std::size_t d = static_cast<std::size_t>(problem.dim());
  const std::size_t n = jets_domain.size();
  if (points.size() != n * d) throw ContractViolation("physics_loss: point/jet count mismatch");
  if (!jets_boundary.empty() && jets_boundary.size() != n)
    throw ContractViolation("physics_loss: mismatched point sets for the two networks");

  PhysicsLoss out;
  out.cotangents.resize(n);
  double acc = 0.0;
  Jet2 sum;
  sum.grad.resize(d);
  sum.hess_diag.resize(d);
  for (std::size_t i = 0; i < n; ++i) {
    sum.value = jets_domain[i].value;
    for (std::size_t k = 0; k < d; ++k) {
      sum.grad[k] = jets_domain[i].grad[k];
      sum.hess_diag[k] = jets_domain[i].hess_diag[k];
    }
    if (!jets_boundary.empty()) {
      sum.value += jets_boundary[i].value;
      for (std::size_t k = 0; k < d; ++k) {
        sum.grad[k] += jets_boundary[i].grad[k];
        sum.hess_diag[k] += jets_boundary[i].hess_diag[k];
      }
    }
    ResidualEval ev = residual(problem, points.subspan(i * d, d), sum);
    acc += ev.r * ev.r;
    const double scale = 2.0 * ev.r / static_cast<double>(n);
    JetCotangent& c = out.cotangents[i];
    c.d_value = scale * ev.d_jet.d_value;
    c.d_grad.resize(d);
    c.d_hess_diag.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
      c.d_grad[k] = scale * ev.d_jet.d_grad[k];
      c.d_hess_diag[k] = scale * ev.d_jet.d_hess_diag[k];
    }
  }
  out.value = acc / static_cast<double>(n);
  return out;
}

AlmPenalty alm_penalty(const AlmState& state, std::span<const double> c) {
  if (c.size() != state.lambdas.size())
    throw ContractViolation("alm_penalty: violation/multiplier length mismatch");
  AlmPenalty out;
  out.d_violation.resize(c.size());
  const double n = static_cast<double>(c.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    acc += state.lambdas[i] * c[i] + 0.5 * state.rho * c[i] * c[i];
    out.d_violation[i] = (state.lambdas[i] + state.rho * c[i]) / n;
  }
  out.value = acc / n;
  return out;
}

void alm_update(AlmState& state, std::span<const double> c) {
  if (c.size() != state.lambdas.size())
    throw ContractViolation("alm_update: violation/multiplier length mismatch");
  for (std::size_t i = 0; i < c.size(); ++i)
    state.lambdas[i] =
        std::clamp(state.lambdas[i] + state.rho * c[i], -state.lambda_max, state.lambda_max);
}

void rho_ramp(AlmState& state) { state.rho = std::min(state.eta * state.rho, state.rho_max); }

RoleLoss role_loss(std::span<const double> boundary_dists, std::span<const double> u_domain,
                   std::span<const double> u_boundary, const RolePriorConfig& config) {
  const std::size_t n = boundary_dists.size();
  if (u_domain.size() != n || (!u_boundary.empty() && u_boundary.size() != n))
    throw ContractViolation("role_loss: misaligned vectors");

  RoleLoss out;
  out.d_u_domain.assign(n, 0.0);
  if (!u_boundary.empty()) out.d_u_boundary.assign(n, 0.0);
  if (n == 0) return out;

  const double inv_n = 1.0 / static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wbd = boundary_weight(boundary_dists[i], config.tau);
    const double win = 1.0 - wbd;
    acc += config.alpha_int * wbd * u_domain[i] * u_domain[i];
    out.d_u_domain[i] = 2.0 * config.alpha_int * wbd * u_domain[i] * inv_n;
    if (!u_boundary.empty()) {
      acc += config.alpha_bd * win * u_boundary[i] * u_boundary[i];
      out.d_u_boundary[i] = 2.0 * config.alpha_bd * win * u_boundary[i] * inv_n;
    }
  }
  out.value = acc * inv_n;
  return out;
}

ModalLoss modal_prior_loss(const PdeProblem& problem,
                           const std::function<double(double, double)>& u_sum,
                           const ModalPriorConfig& config) {
  if (problem.kind != PdeProblem::Kind::Wave)
    throw ConfigError("modal_prior_loss: only defined for the wave problem");
  if (config.quad_points < 16) throw ConfigError("modal_prior_loss: need >= 16 quad points");
  if (config.time_samples < 1) throw ConfigError("modal_prior_loss: need >= 1 time sample");

  ModalLoss out;
  if (config.modes.empty()) return out;

  const int Q = config.quad_points;
  const int m = config.time_samples;
  const double h = 1.0 / Q;
  const double t0 = problem.domain.lo[1], t1 = problem.domain.hi[1];
  const double c = problem.wave_c;

  // Sampled times: midpoint grid over [t0, t1].
  std::vector<double> times(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j)
    times[static_cast<std::size_t>(j)] = t0 + (t1 - t0) * (j + 0.5) / m;

  // a_n(0) from the initial condition, by the same quadrature.
  std::vector<double> a0(config.modes.size());
  for (std::size_t mi = 0; mi < config.modes.size(); ++mi) {
    const int n = config.modes[mi];
    a0[mi] = modal_coefficient(
        [&](double x) {
          const double pt[2] = {x, t0};
          return initial_value(problem, pt).u;
        },
        n, Q);
  }

  const std::size_t nodes_per_time = static_cast<std::size_t>(Q) + 1;
  out.node_coords.resize(static_cast<std::size_t>(m) * nodes_per_time * 2);
  out.d_value.assign(static_cast<std::size_t>(m) * nodes_per_time, 0.0);

  std::vector<double> u_at_nodes(nodes_per_time);
  double acc = 0.0;
  for (int j = 0; j < m; ++j) {
    const double t = times[static_cast<std::size_t>(j)];
    for (int q = 0; q <= Q; ++q) {
      const double x = static_cast<double>(q) * h;
      const std::size_t node = static_cast<std::size_t>(j) * nodes_per_time + q;
      out.node_coords[node * 2] = x;
      out.node_coords[node * 2 + 1] = t;
      u_at_nodes[static_cast<std::size_t>(q)] = u_sum(x, t);
    }
    for (std::size_t mi = 0; mi < config.modes.size(); ++mi) {
      const int n = config.modes[mi];
      // a_n(t) by trapezoid over the stored node values.
      double an = 0.0;
      for (int q = 0; q <= Q; ++q) {
        const double w = (q == 0 || q == Q) ? 0.5 : 1.0;
        an += w * u_at_nodes[static_cast<std::size_t>(q)] * std::sin(n * kPi * q * h);
      }
      an *= 2.0 * h;
      const double target = a0[mi] * std::cos(c * n * kPi * (t - t0));
      const double dev = an - target;
      acc += dev * dev;
      // d(loss)/d u(x_q, t) = (1/m) * 2 dev * 2 h w_q sin(n pi x_q)
      const double common = (2.0 * dev / m) * 2.0 * h;
      for (int q = 0; q <= Q; ++q) {
        const double w = (q == 0 || q == Q) ? 0.5 : 1.0;
        out.d_value[static_cast<std::size_t>(j) * nodes_per_time + q] +=
            common * w * std::sin(n * kPi * q * h);
      }
    }
  }
  out.value = acc / m;
  return out;
}

double mse_loss(std::span<const double> pred, std::span<const double> target,
                std::vector<double>* d_pred) {
  if (pred.size() != target.size()) throw ContractViolation("mse_loss: misaligned vectors");
  if (d_pred) d_pred->assign(pred.size(), 0.0);
  if (pred.empty()) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    acc += e * e;
    if (d_pred) (*d_pred)[i] = 2.0 * e * inv_n;
  }
  return acc * inv_n;
}

double warmup_loss(std::span<const double> u_sum, std::span<const double> g,
                   std::vector<double>* d_u) {
  return mse_loss(u_sum, g, d_u);
}

double fp_constraint_loss(double mass) { return (mass - 1.0) * (mass - 1.0); }

double data_loss(std::span<const double> u_boundary_net, std::span<const double> targets,
                 std::vector<double>* d_u) {
  return mse_loss(u_boundary_net, targets, d_u);
}

double pinning_loss(std::span<const double> u_domain_at_endpoints, std::vector<double>* d_u) {
  if (d_u) d_u->assign(u_domain_at_endpoints.size(), 0.0);
  if (u_domain_at_endpoints.empty()) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(u_domain_at_endpoints.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < u_domain_at_endpoints.size(); ++i) {
    acc += u_domain_at_endpoints[i] * u_domain_at_endpoints[i];
    if (d_u) (*d_u)[i] = 2.0 * u_domain_at_endpoints[i] * inv_n;
  }
  return acc * inv_n;
}

void total_loss(LossBreakdown& b) {
  auto check = [](double v, const char* part) {
    if (!std::isfinite(v))
      throw TrainingError(std::string("non-finite ") + part + " loss");
  };
  check(b.physics, "physics");
  for (double v : b.alm_sets) check(v, "alm_boundary");
  check(b.role, "role");
  check(b.modal, "modal");
  check(b.normalization, "normalization");
  check(b.data, "data");
  check(b.pinning, "pinning");
  check(b.warmup, "warmup");

  double total = b.physics;
  for (double v : b.alm_sets) total += b.wbc_weight * v;
  total += b.gamma_weight * b.role;
  total += b.modal_weight * b.modal;
  total += b.norm_weight * b.normalization;
  total += b.data_weight * b.data;
  total += b.pinning_weight * b.pinning;
  total += b.warmup;
  check(total, "total");
  b.total = total;
}

}  // namespace dualpinn
