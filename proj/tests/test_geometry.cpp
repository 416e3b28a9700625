#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dualpinn/errors.hpp"
#include "dualpinn/geometry.hpp"

using namespace dualpinn;

TEST_CASE("distance to boundary") {
  const Domain sq = Domain::rect(0, 1, 0, 1);
  CHECK(distance_to_boundary(sq, std::vector<double>{0.5, 0.5}) == 0.5);
  CHECK(distance_to_boundary(sq, std::vector<double>{0.0, 0.3}) == 0.0);
  const Domain iv = Domain::interval(-2.5, 2.5);
  CHECK(distance_to_boundary(iv, std::vector<double>{1.0}) == 1.5);
  const Domain st = Domain::spacetime(0, 1, 0, 1);
  // Time faces do not count as boundary.
  CHECK(distance_to_boundary(st, std::vector<double>{0.5, 0.0}) == 0.5);
  CHECK(distance_to_boundary(st, std::vector<double>{0.2, 0.9}) == doctest::Approx(0.2));
  CHECK_THROWS_AS(distance_to_boundary(sq, std::vector<double>{1.5, 0.5}), ContractViolation);
}

TEST_CASE("domain validation and measures") {
  CHECK_THROWS_AS(Domain::interval(1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(Domain::rect(0, 1, 1, 0), ConfigError);
  CHECK(Domain::interval(-2.5, 2.5).diameter() == 5.0);
  CHECK(Domain::rect(0, 1, 0, 1).diameter() == doctest::Approx(std::sqrt(2.0)));
  CHECK(Domain::rect(0, 1, 0, 1).inradius() == 0.5);
  CHECK(Domain::spacetime(0, 1, 0, 2).inradius() == 0.5);
}

TEST_CASE("uniform sampling: counts, openness, determinism, CLT") {
  const Domain sq = Domain::rect(0, 1, 0, 1);
  RngStream rng(77);
  const PointSet ps = sample_uniform(sq, 7000, rng);
  REQUIRE(ps.size() == 7000);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto p = ps.point(i);
    CHECK(p[0] > 0.0);
    CHECK(p[0] < 1.0);
    CHECK(p[1] > 0.0);
    CHECK(p[1] < 1.0);
  }
  RngStream r1(5), r2(5);
  CHECK(sample_uniform(sq, 100, r1).coords == sample_uniform(sq, 100, r2).coords);

  // Empirical mean within 3 sigma of the center, sigma = sqrt(1/12n).
  RngStream r3(11);
  const PointSet big = sample_uniform(sq, 10000, r3);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < big.size(); ++i) {
    mx += big.point(i)[0];
    my += big.point(i)[1];
  }
  mx /= 10000.0;
  my /= 10000.0;
  const double bound = 3.0 * std::sqrt(1.0 / 12.0 / 10000.0);
  CHECK(std::abs(mx - 0.5) < bound);
  CHECK(std::abs(my - 0.5) < bound);

  RngStream r4(1);
  CHECK_THROWS_AS(sample_uniform(sq, 0, r4), ContractViolation);
}

TEST_CASE("LHS edge sampling: counts, on-boundary, stratification") {
  const Domain sq = Domain::rect(0, 1, 0, 1);
  RngStream rng(88);
  const PointSet ps = sample_lhs_edges(sq, 300, rng);
  REQUIRE(ps.size() == 1200);
  for (std::size_t i = 0; i < ps.size(); ++i)
    CHECK(distance_to_boundary(sq, ps.point(i)) == 0.0);

  RngStream r1(3);
  const PointSet tiny = sample_lhs_edges(sq, 1, r1);
  CHECK(tiny.size() == 4);

  // One point per stratum [j/n, (j+1)/n) along the first edge.
  RngStream r2(4);
  const std::size_t n = 50;
  const PointSet strat = sample_lhs_edges(sq, n, r2);
  std::vector<double> params;
  for (std::size_t i = 0; i < n; ++i) params.push_back(strat.point(i)[0]);  // bottom edge x
  std::sort(params.begin(), params.end());
  for (std::size_t j = 0; j < n; ++j) {
    CHECK(params[j] >= static_cast<double>(j) / n);
    CHECK(params[j] < static_cast<double>(j + 1) / n);
  }

  const Domain iv = Domain::interval(0, 1);
  RngStream r3(5);
  CHECK_THROWS_AS(sample_lhs_edges(iv, 10, r3), ConfigError);
}

TEST_CASE("LHS face sampling on spacetime domains") {
  const Domain st = Domain::spacetime(0, 1, 0, 1);
  RngStream rng(99);
  const PointSet ps = sample_lhs_faces(st, 200, rng);
  REQUIRE(ps.size() == 400);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto p = ps.point(i);
    CHECK((p[0] == 0.0 || p[0] == 1.0));
    CHECK(p[1] >= 0.0);
    CHECK(p[1] <= 1.0);
  }
  RngStream r1(2);
  CHECK_THROWS_AS(sample_lhs_faces(Domain::rect(0, 1, 0, 1), 10, r1), ConfigError);
}

TEST_CASE("ring sampling stays in the open band") {
  const Domain sq = Domain::rect(0, 1, 0, 1);
  RngStream rng(111);
  const PointSet ps = sample_ring(sq, 8000, 0.1, rng);
  REQUIRE(ps.size() == 8000);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double d = distance_to_boundary(sq, ps.point(i));
    CHECK(d > 0.0);
    CHECK(d < 0.1);
  }

  RngStream r1(6);
  CHECK_THROWS_AS(sample_ring(sq, 10, 0.5, r1), ConfigError);   // delta == inradius
  CHECK_THROWS_AS(sample_ring(sq, 10, 0.75, r1), ConfigError);  // delta > inradius

  const Domain iv = Domain::interval(0, 1);
  RngStream r2(7);
  const PointSet ring1d = sample_ring(iv, 500, 0.25, r2);
  for (std::size_t i = 0; i < ring1d.size(); ++i) {
    const double x = ring1d.point(i)[0];
    CHECK(((x > 0.0 && x < 0.25) || (x > 0.75 && x < 1.0)));
  }
}

TEST_CASE("initial-surface sampling") {
  const Domain st = Domain::spacetime(0, 1, 0, 1);
  RngStream rng(13);
  const PointSet ps = sample_initial(st, 500, rng);
  REQUIRE(ps.size() == 500);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CHECK(ps.point(i)[1] == 0.0);
    CHECK(ps.point(i)[0] > 0.0);
    CHECK(ps.point(i)[0] < 1.0);
  }
  RngStream r1(14), r2(14);
  CHECK(sample_initial(st, 64, r1).coords == sample_initial(st, 64, r2).coords);
  RngStream r3(15);
  CHECK_THROWS_AS(sample_initial(Domain::rect(0, 1, 0, 1), 10, r3), ConfigError);
}
