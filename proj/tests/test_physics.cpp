#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dualpinn/errors.hpp"
#include "dualpinn/physics.hpp"
#include "dualpinn/rng.hpp"
#include "test_helpers.hpp"

using namespace dualpinn;
using dptest::rel_err;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<PdeProblem> all_problems() {
  return {PdeProblem::fokker_planck(), PdeProblem::laplace(), PdeProblem::poisson(),
          PdeProblem::wave()};
}
}  // namespace

TEST_CASE("exact solutions satisfy their PDEs on analytic jets") {
  for (const PdeProblem& p : all_problems()) {
    RngStream rng(314);
    const int d = p.dim();
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> x(static_cast<std::size_t>(d));
      for (int k = 0; k < d; ++k) x[static_cast<std::size_t>(k)] =
          rng.uniform(p.domain.lo[k], p.domain.hi[k]);
      const Jet2 jet = exact_jet(p, x);
      CHECK(std::abs(residual(p, x, jet).r) <= 1e-10);
    }
  }
}

TEST_CASE("residual examples") {
  // Fokker-Planck with u == 1 (u_x = u_xx = 0) at x = 0: r = -(a - 0) = -0.3
  const PdeProblem fp = PdeProblem::fokker_planck();
  Jet2 one;
  one.value = 1.0;
  one.grad = {0.0};
  one.hess_diag = {0.0};
  CHECK(residual(fp, std::vector<double>{0.0}, one).r == doctest::Approx(-0.3).epsilon(1e-14));

  // Laplace on u = x^2 + y^2: r = 4 everywhere.
  const PdeProblem lap = PdeProblem::laplace();
  Jet2 quad;
  quad.value = 0.5;
  quad.grad = {1.0, 1.0};
  quad.hess_diag = {2.0, 2.0};
  CHECK(residual(lap, std::vector<double>{0.3, 0.4}, quad).r == 4.0);

  // Dimension mismatch is a contract violation.
  CHECK_THROWS_AS(residual(lap, std::vector<double>{0.3}, quad), ContractViolation);
}

TEST_CASE("residual cotangents match finite differences w.r.t. jet entries") {
  RngStream rng(555);
  for (const PdeProblem& p : all_problems()) {
    const std::size_t d = static_cast<std::size_t>(p.dim());
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) x[k] = rng.uniform(p.domain.lo[k], p.domain.hi[k]);
    Jet2 jet;
    jet.value = rng.uniform(-1, 1);
    jet.grad.resize(d);
    jet.hess_diag.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
      jet.grad[k] = rng.uniform(-1, 1);
      jet.hess_diag[k] = rng.uniform(-1, 1);
    }
    const ResidualEval ev = residual(p, x, jet);
    const double h = 1e-6;
    auto fd = [&](double* channel) {
      *channel += h;
      const double rp = residual(p, x, jet).r;
      *channel -= 2 * h;
      const double rm = residual(p, x, jet).r;
      *channel += h;
      return (rp - rm) / (2 * h);
    };
    CHECK(rel_err(ev.d_jet.d_value, fd(&jet.value)) <= 1e-8);
    for (std::size_t k = 0; k < d; ++k) {
      CHECK(rel_err(ev.d_jet.d_grad[k], fd(&jet.grad[k])) <= 1e-8);
      CHECK(rel_err(ev.d_jet.d_hess_diag[k], fd(&jet.hess_diag[k])) <= 1e-8);
    }
  }
}

TEST_CASE("exact solution point values") {
  const PdeProblem lap = PdeProblem::laplace();
  CHECK(exact_u(lap, std::vector<double>{1.0, 0.0}) == 0.0625);
  for (double y : {0.0, 0.25, 0.8, 1.0})
    CHECK(exact_u(lap, std::vector<double>{0.0, y}) == 0.0);
  const PdeProblem poi = PdeProblem::poisson();
  CHECK(exact_u(poi, std::vector<double>{0.5, 0.5}) ==
        doctest::Approx(0.05066059182116889).epsilon(1e-14));
}

TEST_CASE("fokker-planck normalization") {
  const PdeProblem fp = PdeProblem::fokker_planck();
  // Regression constant from an independent quadrature oracle
  // (Riemann dx=0.01 on [-2.5, 2.5], cross-checked at dx=0.001).
  CHECK(fp.fp_norm_c == doctest::Approx(0.3246981217359402).epsilon(1e-12));
  CHECK(fp_tail_ratio(fp) < 1e-6);

  const auto grid = fp_grid(fp);
  CHECK(grid.size() == 501);
  std::vector<double> u(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    u[i] = exact_u(fp, std::vector<double>{grid[i]});
  CHECK(fp_mass(u, fp.fp_dx) == doctest::Approx(1.0).epsilon(1e-12));

  // Unnormalized integrand at x = 0 is exp(0) = 1.
  CHECK(exact_u(fp, std::vector<double>{0.0}) ==
        doctest::Approx(fp.fp_norm_c).epsilon(1e-14));

  std::vector<double> zero(grid.size(), 0.0);
  CHECK(fp_mass(zero, fp.fp_dx) == 0.0);
  std::vector<double> ones(grid.size(), 1.0);
  CHECK(fp_mass(ones, fp.fp_dx) == doctest::Approx(5.0).epsilon(0.01 / 5.0 + 1e-12));
}

TEST_CASE("fokker-planck exact density is even and normalized") {
  const PdeProblem fp = PdeProblem::fokker_planck();
  RngStream rng(777);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(0.0, 2.5);
    CHECK(exact_u(fp, std::vector<double>{x}) ==
          doctest::Approx(exact_u(fp, std::vector<double>{-x})).epsilon(1e-12));
  }
}

TEST_CASE("modal coefficients: orthogonality, wave IC, trapezoid order") {
  auto sin1 = [](double x) { return std::sin(kPi * x); };
  CHECK(std::abs(modal_coefficient(sin1, 1, 256) - 1.0) <= 1e-6);
  CHECK(std::abs(modal_coefficient(sin1, 4, 256)) <= 1e-6);

  const PdeProblem wave = PdeProblem::wave();
  auto wave_ic = [&](double x) {
    return exact_u(wave, std::vector<double>{x, 0.0});
  };
  CHECK(std::abs(modal_coefficient(wave_ic, 1, 256) - 1.0) <= 1e-6);
  CHECK(std::abs(modal_coefficient(wave_ic, 4, 256) - 0.5) <= 1e-6);

  // Halving the spacing cuts the error ~4x (2nd-order trapezoid).
  auto poly = [](double x) { return x * x; };
  const double a1_exact = 2.0 * (kPi * kPi - 4.0) / (kPi * kPi * kPi);
  const double e128 = std::abs(modal_coefficient(poly, 1, 128) - a1_exact);
  const double e256 = std::abs(modal_coefficient(poly, 1, 256) - a1_exact);
  CHECK(e128 / e256 == doctest::Approx(4.0).epsilon(0.05));

  CHECK_THROWS_AS(modal_coefficient(sin1, 0, 256), ContractViolation);
  CHECK_THROWS_AS(modal_coefficient(sin1, 1, 8), ContractViolation);
}

TEST_CASE("boundary and initial targets") {
  const PdeProblem wave = PdeProblem::wave();
  CHECK(boundary_value(wave, std::vector<double>{0.0, 0.37}) == 0.0);
  CHECK(boundary_value(wave, std::vector<double>{1.0, 0.9}) == 0.0);
  CHECK_THROWS_AS(boundary_value(wave, std::vector<double>{0.5, 0.5}), ContractViolation);

  const PdeProblem poi = PdeProblem::poisson();
  CHECK(boundary_value(poi, std::vector<double>{0.3, 0.0}) == doctest::Approx(0.0).epsilon(1e-15));

  const InitialTargets t = initial_value(wave, std::vector<double>{0.5, 0.0});
  CHECK(t.u == doctest::Approx(1.0).epsilon(1e-14));  // sin(pi/2) + 0.5 sin(2 pi)
  CHECK(t.u_t == 0.0);
  CHECK_THROWS_AS(initial_value(wave, std::vector<double>{0.5, 0.5}), ContractViolation);
  CHECK_THROWS_AS(initial_value(poi, std::vector<double>{0.5, 0.0}), ContractViolation);
}

TEST_CASE("wave exact satisfies both initial conditions") {
  const PdeProblem wave = PdeProblem::wave();
  RngStream rng(999);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(0.0, 1.0);
    const std::vector<double> pt{x, 0.0};
    const InitialTargets t = initial_value(wave, pt);
    CHECK(std::abs(exact_u(wave, pt) - t.u) <= 1e-12);
    CHECK(std::abs(exact_jet(wave, pt).grad[1]) <= 1e-12);  // du/dt(x, 0) = 0
  }
}
