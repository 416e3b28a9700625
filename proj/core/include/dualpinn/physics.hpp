#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dualpinn/diffnet.hpp"
#include "dualpinn/geometry.hpp"

namespace dualpinn {

/// One of the four benchmark PDE problems. Factories precompute whatever the
/// exact solution needs (the Fokker-Planck normalization constant).
struct PdeProblem {
  enum class Kind { FokkerPlanck, Laplace, Poisson, Wave };

  Kind kind = Kind::Poisson;
  Domain domain = Domain::rect(0.0, 1.0, 0.0, 1.0);

  // Fokker-Planck drift/diffusion/grid parameters.
  double fp_a = 0.3, fp_b = 0.5, fp_sigma = 0.5, fp_dx = 0.01;
  double fp_norm_c = 0.0;  // set by the factory

  double wave_c = 2.0;

  static PdeProblem fokker_planck(double a = 0.3, double b = 0.5, double sigma = 0.5,
                                  double dx = 0.01,
                                  Domain domain = Domain::interval(-2.5, 2.5));
  static PdeProblem laplace(Domain domain = Domain::rect(0.0, 1.0, 0.0, 1.0));
  static PdeProblem poisson(Domain domain = Domain::rect(0.0, 1.0, 0.0, 1.0));
  static PdeProblem wave(double c = 2.0, Domain domain = Domain::spacetime(0.0, 1.0, 0.0, 1.0));

  int dim() const { return domain.dim(); }
  bool has_exact() const { return true; }
  const char* name() const;
};

/// PDE residual at one point together with its exact partial derivatives with
/// respect to the jet channels (u, du/dx_i, d2u/dx_i^2).
struct ResidualEval {
  double r = 0.0;
  JetCotangent d_jet;
};

ResidualEval residual(const PdeProblem& problem, std::span<const double> x, const Jet2& jet);

/// Exact solution value.
double exact_u(const PdeProblem& problem, std::span<const double> x);

/// Exact solution with closed-form first and pure second derivatives.
Jet2 exact_jet(const PdeProblem& problem, std::span<const double> x);

/// The uniform normalization grid (spacing fp_dx spanning the FP interval).
std::vector<double> fp_grid(const PdeProblem& problem);

/// C such that dx * sum_grid C*exp[(1/2sigma^2)(2a x^2 - b x^4)] = 1.
/// Warns on stderr when the density is not negligible at the interval ends.
double fp_normalization_constant(const PdeProblem& problem);

/// Ratio of the unnormalized density at the interval ends to its peak value.
double fp_tail_ratio(const PdeProblem& problem);

/// dx * sum of u values on the normalization grid.
double fp_mass(std::span<const double> u_values, double dx);

/// a_n = 2 * integral_0^1 u(x) sin(n pi x) dx by composite trapezoid with
/// quad_points subintervals.
double modal_coefficient(const std::function<double(double)>& u_slice, int n, int quad_points);

/// Dirichlet target on the boundary constraint surface.
double boundary_value(const PdeProblem& problem, std::span<const double> x);

struct InitialTargets {
  double u = 0.0;   // u(x, t0)
  double u_t = 0.0; // du/dt(x, t0)
};

/// Initial-condition targets for the wave problem.
InitialTargets initial_value(const PdeProblem& problem, std::span<const double> x);

}  // namespace dualpinn
