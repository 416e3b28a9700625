#include "dualpinn/physics.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "dualpinn/errors.hpp"

namespace dualpinn {

namespace {

constexpr double kPi = std::numbers::pi;

void check_dim(const PdeProblem& p, std::span<const double> x) {
  if (static_cast<int>(x.size()) != p.dim())
    throw ContractViolation(std::string(p.name()) + ": point dimension mismatch");
}

void check_jet_dim(const PdeProblem& p, const Jet2& jet) {
  if (jet.grad.size() != static_cast<std::size_t>(p.dim()) ||
      jet.hess_diag.size() != static_cast<std::size_t>(p.dim()))
    throw ContractViolation(std::string(p.name()) + ": jet dimension mismatch");
}

// Exponent of the unnormalized FP density: (1/2sigma^2)(2a x^2 - b x^4).
double fp_exponent(const PdeProblem& p, double x) {
  return (2.0 * p.fp_a * x * x - p.fp_b * x * x * x * x) / (2.0 * p.fp_sigma * p.fp_sigma);
}

bool on_edge(double v, double lo, double hi) { return v == lo || v == hi; }

}  // namespace

const char* PdeProblem::name() const {
  switch (kind) {
    case Kind::FokkerPlanck:
      return "fokker_planck";
    case Kind::Laplace:
      return "laplace";
    case Kind::Poisson:
      return "poisson";
    case Kind::Wave:
    default:
      return "wave";
  }
}

PdeProblem PdeProblem::fokker_planck(double a, double b, double sigma, double dx, Domain domain) {
  if (!(sigma > 0.0)) throw ConfigError("fokker_planck: sigma must be > 0");
  if (!(dx > 0.0)) throw ConfigError("fokker_planck: dx must be > 0");
  if (domain.kind != Domain::Kind::Interval)
    throw ConfigError("fokker_planck: domain must be an Interval");
  PdeProblem p;
  p.kind = Kind::FokkerPlanck;
  p.domain = domain;
  p.fp_a = a;
  p.fp_b = b;
  p.fp_sigma = sigma;
  p.fp_dx = dx;
  p.fp_norm_c = fp_normalization_constant(p);
  return p;
}

PdeProblem PdeProblem::laplace(Domain domain) {
  if (domain.kind != Domain::Kind::Rect) throw ConfigError("laplace: domain must be a Rect");
  PdeProblem p;
  p.kind = Kind::Laplace;
  p.domain = domain;
  return p;
}

PdeProblem PdeProblem::poisson(Domain domain) {
  if (domain.kind != Domain::Kind::Rect) throw ConfigError("poisson: domain must be a Rect");
  PdeProblem p;
  p.kind = Kind::Poisson;
  p.domain = domain;
  return p;
}

PdeProblem PdeProblem::wave(double c, Domain domain) {
  if (!(c > 0.0)) throw ConfigError("wave: c must be > 0");
  if (domain.kind != Domain::Kind::SpaceTime)
    throw ConfigError("wave: domain must be a SpaceTime box");
  PdeProblem p;
  p.kind = Kind::Wave;
  p.domain = domain;
  p.wave_c = c;
  return p;
}

ResidualEval residual(const PdeProblem& problem, std::span<const double> x, const Jet2& jet) {
  check_dim(problem, x);
  check_jet_dim(problem, jet);
  ResidualEval ev;
  ev.d_jet.d_grad.assign(x.size(), 0.0);
  ev.d_jet.d_hess_diag.assign(x.size(), 0.0);

  switch (problem.kind) {
    case PdeProblem::Kind::FokkerPlanck: {
      // -d/dx[(a x - b x^3) u] + (sigma^2/2) u_xx
      const double a = problem.fp_a, b = problem.fp_b;
      const double drift = a * x[0] - b * x[0] * x[0] * x[0];
      const double drift_x = a - 3.0 * b * x[0] * x[0];
      const double half_sig2 = 0.5 * problem.fp_sigma * problem.fp_sigma;
      ev.r = -(drift_x * jet.value + drift * jet.grad[0]) + half_sig2 * jet.hess_diag[0];
      ev.d_jet.d_value = -drift_x;
      ev.d_jet.d_grad[0] = -drift;
      ev.d_jet.d_hess_diag[0] = half_sig2;
      break;
    }
    case PdeProblem::Kind::Laplace: {
      ev.r = jet.hess_diag[0] + jet.hess_diag[1];
      ev.d_jet.d_hess_diag[0] = 1.0;
      ev.d_jet.d_hess_diag[1] = 1.0;
      break;
    }
    case PdeProblem::Kind::Poisson: {
      const double f = -std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
      ev.r = jet.hess_diag[0] + jet.hess_diag[1] - f;
      ev.d_jet.d_hess_diag[0] = 1.0;
      ev.d_jet.d_hess_diag[1] = 1.0;
      break;
    }
    case PdeProblem::Kind::Wave: {
      // coordinates are (x, t): u_tt - c^2 u_xx
      const double c2 = problem.wave_c * problem.wave_c;
      ev.r = jet.hess_diag[1] - c2 * jet.hess_diag[0];
      ev.d_jet.d_hess_diag[0] = -c2;
      ev.d_jet.d_hess_diag[1] = 1.0;
      break;
    }
  }
  return ev;
}

double exact_u(const PdeProblem& problem, std::span<const double> x) {
  check_dim(problem, x);
  switch (problem.kind) {
    case PdeProblem::Kind::FokkerPlanck:
      return problem.fp_norm_c * std::exp(fp_exponent(problem, x[0]));
    case PdeProblem::Kind::Laplace: {
      const double X = x[0], Y = x[1];
      return (std::pow(X, 5) - 10.0 * X * X * X * Y * Y + 5.0 * X * std::pow(Y, 4)) / 16.0;
    }
    case PdeProblem::Kind::Poisson:
      return std::sin(kPi * x[0]) * std::sin(kPi * x[1]) / (2.0 * kPi * kPi);
    case PdeProblem::Kind::Wave:
    default: {
      const double X = x[0], T = x[1], c = problem.wave_c;
      return std::sin(kPi * X) * std::cos(c * kPi * T) +
             0.5 * std::sin(4.0 * kPi * X) * std::cos(4.0 * c * kPi * T);
    }
  }
}

Jet2 exact_jet(const PdeProblem& problem, std::span<const double> x) {
  check_dim(problem, x);
  Jet2 jet;
  jet.grad.assign(x.size(), 0.0);
  jet.hess_diag.assign(x.size(), 0.0);
  switch (problem.kind) {
    case PdeProblem::Kind::FokkerPlanck: {
      const double s2 = problem.fp_sigma * problem.fp_sigma;
      const double u = problem.fp_norm_c * std::exp(fp_exponent(problem, x[0]));
      const double q1 = 2.0 * (problem.fp_a * x[0] - problem.fp_b * x[0] * x[0] * x[0]) / s2;
      const double q2 = 2.0 * (problem.fp_a - 3.0 * problem.fp_b * x[0] * x[0]) / s2;
      jet.value = u;
      jet.grad[0] = u * q1;
      jet.hess_diag[0] = u * (q2 + q1 * q1);
      break;
    }
    case PdeProblem::Kind::Laplace: {
      const double X = x[0], Y = x[1];
      jet.value = (std::pow(X, 5) - 10.0 * X * X * X * Y * Y + 5.0 * X * std::pow(Y, 4)) / 16.0;
      jet.grad[0] = (5.0 * std::pow(X, 4) - 30.0 * X * X * Y * Y + 5.0 * std::pow(Y, 4)) / 16.0;
      jet.grad[1] = (-20.0 * X * X * X * Y + 20.0 * X * Y * Y * Y) / 16.0;
      jet.hess_diag[0] = (20.0 * X * X * X - 60.0 * X * Y * Y) / 16.0;
      jet.hess_diag[1] = (-20.0 * X * X * X + 60.0 * X * Y * Y) / 16.0;
      break;
    }
    case PdeProblem::Kind::Poisson: {
      const double sx = std::sin(kPi * x[0]), sy = std::sin(kPi * x[1]);
      const double cx = std::cos(kPi * x[0]), cy = std::cos(kPi * x[1]);
      const double amp = 1.0 / (2.0 * kPi * kPi);
      jet.value = amp * sx * sy;
      jet.grad[0] = amp * kPi * cx * sy;
      jet.grad[1] = amp * kPi * sx * cy;
      jet.hess_diag[0] = -amp * kPi * kPi * sx * sy;
      jet.hess_diag[1] = -amp * kPi * kPi * sx * sy;
      break;
    }
    case PdeProblem::Kind::Wave: {
      const double X = x[0], T = x[1], c = problem.wave_c;
      const double s1 = std::sin(kPi * X), c1 = std::cos(kPi * X);
      const double s4 = std::sin(4.0 * kPi * X), c4 = std::cos(4.0 * kPi * X);
      const double ct1 = std::cos(c * kPi * T), st1 = std::sin(c * kPi * T);
      const double ct4 = std::cos(4.0 * c * kPi * T), st4 = std::sin(4.0 * c * kPi * T);
      jet.value = s1 * ct1 + 0.5 * s4 * ct4;
      jet.grad[0] = kPi * c1 * ct1 + 2.0 * kPi * c4 * ct4;
      jet.grad[1] = -c * kPi * s1 * st1 - 2.0 * c * kPi * s4 * st4;
      jet.hess_diag[0] = -kPi * kPi * s1 * ct1 - 8.0 * kPi * kPi * s4 * ct4;
      jet.hess_diag[1] =
          -c * c * kPi * kPi * s1 * ct1 - 8.0 * c * c * kPi * kPi * s4 * ct4;
      break;
    }
  }
  return jet;
}

std::vector<double> fp_grid(const PdeProblem& problem) {
  if (problem.kind != PdeProblem::Kind::FokkerPlanck)
    throw ContractViolation("fp_grid: not a Fokker-Planck problem");
  const double a = problem.domain.lo[0], b = problem.domain.hi[0], dx = problem.fp_dx;
  const auto n = static_cast<std::size_t>(std::llround((b - a) / dx));
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid[i] = a + static_cast<double>(i) * dx;
  return grid;
}

double fp_tail_ratio(const PdeProblem& problem) {
  // Peak of exp(q) sits at x = +-sqrt(a/b); ends of the interval at lo/hi.
  const double peak_x = std::sqrt(problem.fp_a / problem.fp_b);
  const double qpeak = fp_exponent(problem, peak_x);
  const double qend = std::max(fp_exponent(problem, problem.domain.lo[0]),
                               fp_exponent(problem, problem.domain.hi[0]));
  return std::exp(qend - qpeak);
}

double fp_normalization_constant(const PdeProblem& problem) {
  if (problem.kind != PdeProblem::Kind::FokkerPlanck)
    throw ContractViolation("fp_normalization_constant: not a Fokker-Planck problem");
  const auto grid = fp_grid(problem);
  double sum = 0.0;
  for (double x : grid) sum += std::exp(fp_exponent(problem, x));
  if (fp_tail_ratio(problem) > 1e-6)
    std::fprintf(stderr,
                 "warning: Fokker-Planck interval [%g, %g] truncates the density "
                 "(end/peak ratio %.3g > 1e-6); normalization will be biased\n",
                 problem.domain.lo[0], problem.domain.hi[0], fp_tail_ratio(problem));
  return 1.0 / (problem.fp_dx * sum);
}

double fp_mass(std::span<const double> u_values, double dx) {
  double sum = 0.0;
  for (double v : u_values) sum += v;
  return dx * sum;
}

double modal_coefficient(const std::function<double(double)>& u_slice, int n, int quad_points) {
  if (n < 1) throw ContractViolation("modal_coefficient: mode index must be >= 1");
  if (quad_points < 16) throw ContractViolation("modal_coefficient: need >= 16 quad points");
  const double h = 1.0 / quad_points;
  double sum = 0.0;
  for (int q = 0; q <= quad_points; ++q) {
    const double x = static_cast<double>(q) * h;
    const double f = u_slice(x) * std::sin(n * kPi * x);
    sum += (q == 0 || q == quad_points) ? 0.5 * f : f;
  }
  return 2.0 * h * sum;
}

double boundary_value(const PdeProblem& problem, std::span<const double> x) {
  check_dim(problem, x);
  const Domain& d = problem.domain;
  switch (problem.kind) {
    case PdeProblem::Kind::FokkerPlanck:
      if (!on_edge(x[0], d.lo[0], d.hi[0]))
        throw ContractViolation("boundary_value: point not at an interval endpoint");
      return exact_u(problem, x);
    case PdeProblem::Kind::Laplace:
    case PdeProblem::Kind::Poisson:
      if (!on_edge(x[0], d.lo[0], d.hi[0]) && !on_edge(x[1], d.lo[1], d.hi[1]))
        throw ContractViolation("boundary_value: point not on the rectangle boundary");
      return exact_u(problem, x);
    case PdeProblem::Kind::Wave:
    default:
      if (!on_edge(x[0], d.lo[0], d.hi[0]))
        throw ContractViolation("boundary_value: point not on a spatial face");
      return 0.0;
  }
}

InitialTargets initial_value(const PdeProblem& problem, std::span<const double> x) {
  check_dim(problem, x);
  if (problem.kind != PdeProblem::Kind::Wave)
    throw ContractViolation("initial_value: only the wave problem has initial conditions");
  if (x[1] != problem.domain.lo[1])
    throw ContractViolation("initial_value: point not on the initial surface");
  InitialTargets t;
  t.u = std::sin(kPi * x[0]) + 0.5 * std::sin(4.0 * kPi * x[0]);
  t.u_t = 0.0;
  return t;
}

}  // namespace dualpinn
