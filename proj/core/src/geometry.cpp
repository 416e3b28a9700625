#include "dualpinn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dualpinn/errors.hpp"

namespace dualpinn {

Domain Domain::interval(double a, double b) {
  if (!(a < b)) throw ConfigError("Interval requires a < b");
  Domain d;
  d.kind = Kind::Interval;
  d.lo[0] = a;
  d.hi[0] = b;
  return d;
}

Domain Domain::rect(double x0, double x1, double y0, double y1) {
  if (!(x0 < x1) || !(y0 < y1)) throw ConfigError("Rect requires x0 < x1 and y0 < y1");
  Domain d;
  d.kind = Kind::Rect;
  d.lo[0] = x0;
  d.hi[0] = x1;
  d.lo[1] = y0;
  d.hi[1] = y1;
  return d;
}

Domain Domain::spacetime(double x0, double x1, double t0, double t1) {
  if (!(x0 < x1) || !(t0 < t1)) throw ConfigError("SpaceTime requires x0 < x1 and t0 < t1");
  Domain d;
  d.kind = Kind::SpaceTime;
  d.lo[0] = x0;
  d.hi[0] = x1;
  d.lo[1] = t0;
  d.hi[1] = t1;
  return d;
}

double Domain::diameter() const {
  if (kind == Kind::Interval) return hi[0] - lo[0];
  const double dx = hi[0] - lo[0], dy = hi[1] - lo[1];
  return std::sqrt(dx * dx + dy * dy);
}

double Domain::inradius() const {
  switch (kind) {
    case Kind::Interval:
      return 0.5 * (hi[0] - lo[0]);
    case Kind::Rect:
      return 0.5 * std::min(hi[0] - lo[0], hi[1] - lo[1]);
    case Kind::SpaceTime:
    default:
      return 0.5 * (hi[0] - lo[0]);  // spatial faces only
  }
}

bool Domain::contains(std::span<const double> x) const {
  const int d = dim();
  if (static_cast<int>(x.size()) != d) return false;
  for (int i = 0; i < d; ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

double distance_to_boundary(const Domain& domain, std::span<const double> x) {
  if (!domain.contains(x))
    throw ContractViolation("distance_to_boundary: point outside closed domain");
  switch (domain.kind) {
    case Domain::Kind::Interval:
      return std::min(x[0] - domain.lo[0], domain.hi[0] - x[0]);
    case Domain::Kind::Rect:
      return std::min(std::min(x[0] - domain.lo[0], domain.hi[0] - x[0]),
                      std::min(x[1] - domain.lo[1], domain.hi[1] - x[1]));
    case Domain::Kind::SpaceTime:
    default:
      return std::min(x[0] - domain.lo[0], domain.hi[0] - x[0]);
  }
}

PointSet sample_uniform(const Domain& domain, std::size_t n, RngStream& rng) {
  if (n == 0) throw ContractViolation("sample_uniform: n must be >= 1");
  const int d = domain.dim();
  PointSet ps;
  ps.dim = d;
  ps.tag = PointTag::Interior;
  ps.coords.reserve(n * static_cast<std::size_t>(d));
  double pt[2];
  for (std::size_t i = 0; i < n; ++i) {
    // Redraw the measure-zero landings on a face so points are strictly inside.
    for (;;) {
      bool open = true;
      for (int k = 0; k < d; ++k) {
        pt[k] = rng.uniform(domain.lo[k], domain.hi[k]);
        if (pt[k] <= domain.lo[k] || pt[k] >= domain.hi[k]) open = false;
      }
      if (open) break;
    }
    for (int k = 0; k < d; ++k) ps.coords.push_back(pt[k]);
  }
  return ps;
}

PointSet sample_lhs_edges(const Domain& rect, std::size_t n_per_edge, RngStream& rng) {
  if (rect.kind != Domain::Kind::Rect)
    throw ConfigError("sample_lhs_edges: requires a Rect domain");
  if (n_per_edge == 0) throw ContractViolation("sample_lhs_edges: n_per_edge must be >= 1");

  PointSet ps;
  ps.dim = 2;
  ps.tag = PointTag::Boundary;
  ps.coords.reserve(4 * n_per_edge * 2);

  auto stratified = [&](std::size_t j) {
    return (static_cast<double>(j) + rng.uniform()) / static_cast<double>(n_per_edge);
  };
  // Edge order: bottom (y=y0), top (y=y1), left (x=x0), right (x=x1).
  for (std::size_t j = 0; j < n_per_edge; ++j) {
    ps.coords.push_back(rect.lo[0] + (rect.hi[0] - rect.lo[0]) * stratified(j));
    ps.coords.push_back(rect.lo[1]);
  }
  for (std::size_t j = 0; j < n_per_edge; ++j) {
    ps.coords.push_back(rect.lo[0] + (rect.hi[0] - rect.lo[0]) * stratified(j));
    ps.coords.push_back(rect.hi[1]);
  }
  for (std::size_t j = 0; j < n_per_edge; ++j) {
    ps.coords.push_back(rect.lo[0]);
    ps.coords.push_back(rect.lo[1] + (rect.hi[1] - rect.lo[1]) * stratified(j));
  }
  for (std::size_t j = 0; j < n_per_edge; ++j) {
    ps.coords.push_back(rect.hi[0]);
    ps.coords.push_back(rect.lo[1] + (rect.hi[1] - rect.lo[1]) * stratified(j));
  }
  return ps;
}

PointSet sample_lhs_faces(const Domain& spacetime, std::size_t n_per_face, RngStream& rng) {
  if (spacetime.kind != Domain::Kind::SpaceTime)
    throw ConfigError("sample_lhs_faces: requires a SpaceTime domain");
  if (n_per_face == 0) throw ContractViolation("sample_lhs_faces: n_per_face must be >= 1");

  PointSet ps;
  ps.dim = 2;
  ps.tag = PointTag::Boundary;
  ps.coords.reserve(2 * n_per_face * 2);
  auto stratified = [&](std::size_t j) {
    return (static_cast<double>(j) + rng.uniform()) / static_cast<double>(n_per_face);
  };
  for (std::size_t j = 0; j < n_per_face; ++j) {
    ps.coords.push_back(spacetime.lo[0]);
    ps.coords.push_back(spacetime.lo[1] + (spacetime.hi[1] - spacetime.lo[1]) * stratified(j));
  }
  for (std::size_t j = 0; j < n_per_face; ++j) {
    ps.coords.push_back(spacetime.hi[0]);
    ps.coords.push_back(spacetime.lo[1] + (spacetime.hi[1] - spacetime.lo[1]) * stratified(j));
  }
  return ps;
}

PointSet sample_ring(const Domain& domain, std::size_t n, double delta, RngStream& rng) {
  if (!(delta > 0.0) || !(delta < domain.inradius()))
    throw ConfigError("sample_ring: delta must satisfy 0 < delta < inradius (" +
                      std::to_string(domain.inradius()) + ")");
  if (n == 0) throw ContractViolation("sample_ring: n must be >= 1");

  const int d = domain.dim();
  PointSet ps;
  ps.dim = d;
  ps.tag = PointTag::Interior;
  ps.coords.reserve(n * static_cast<std::size_t>(d));
  double pt[2];
  for (std::size_t i = 0; i < n; ++i) {
    for (;;) {
      bool open = true;
      for (int k = 0; k < d; ++k) {
        pt[k] = rng.uniform(domain.lo[k], domain.hi[k]);
        if (pt[k] <= domain.lo[k] || pt[k] >= domain.hi[k]) open = false;
      }
      if (!open) continue;
      const double dist = distance_to_boundary(domain, {pt, static_cast<std::size_t>(d)});
      if (dist > 0.0 && dist < delta) break;
    }
    for (int k = 0; k < d; ++k) ps.coords.push_back(pt[k]);
  }
  return ps;
}

PointSet sample_initial(const Domain& spacetime, std::size_t n, RngStream& rng) {
  if (spacetime.kind != Domain::Kind::SpaceTime)
    throw ConfigError("sample_initial: requires a SpaceTime domain");
  if (n == 0) throw ContractViolation("sample_initial: n must be >= 1");

  PointSet ps;
  ps.dim = 2;
  ps.tag = PointTag::Initial;
  ps.coords.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    double x;
    do {
      x = rng.uniform(spacetime.lo[0], spacetime.hi[0]);
    } while (x <= spacetime.lo[0] || x >= spacetime.hi[0]);
    ps.coords.push_back(x);
    ps.coords.push_back(spacetime.lo[1]);
  }
  return ps;
}

}  // namespace dualpinn
