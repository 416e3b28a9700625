#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dualpinn/rng.hpp"

namespace dualpinn {

/// Axis-aligned computational domain. SpaceTime is a rectangle whose second
/// axis is time: the spatial boundary sits at x0/x1 and the initial surface
/// at t0; boundary distance ignores the time faces.
struct Domain {
  enum class Kind { Interval, Rect, SpaceTime };

  Kind kind = Kind::Interval;
  double lo[2] = {0.0, 0.0};
  double hi[2] = {1.0, 1.0};

  static Domain interval(double a, double b);
  static Domain rect(double x0, double x1, double y0, double y1);
  static Domain spacetime(double x0, double x1, double t0, double t1);

  int dim() const { return kind == Kind::Interval ? 1 : 2; }
  double diameter() const;
  /// Largest distance-to-boundary value attainable inside the domain.
  double inradius() const;
  bool contains(std::span<const double> x) const;
};

enum class PointTag { Interior, Boundary, Initial };

struct PointSet {
  int dim = 0;
  PointTag tag = PointTag::Interior;
  std::vector<double> coords;  // n x dim, row-major

  std::size_t size() const { return dim > 0 ? coords.size() / static_cast<std::size_t>(dim) : 0; }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

/// Distance from x to the Dirichlet boundary (spatial faces only for
/// SpaceTime domains). x must lie in the closed domain.
double distance_to_boundary(const Domain& domain, std::span<const double> x);

/// n i.i.d. uniform points strictly inside the domain.
PointSet sample_uniform(const Domain& domain, std::size_t n, RngStream& rng);

/// 1-D Latin hypercube per edge of a Rect: each edge parameter is split into
/// n_per_edge equal strata with one uniform draw each. 4*n_per_edge points.
PointSet sample_lhs_edges(const Domain& rect, std::size_t n_per_edge, RngStream& rng);

/// LHS on the two spatial faces (x = x0 and x = x1) of a SpaceTime domain,
/// stratified in t. 2*n_per_face points.
PointSet sample_lhs_faces(const Domain& spacetime, std::size_t n_per_face, RngStream& rng);

/// n points with 0 < distance_to_boundary < delta, by rejection from uniform.
PointSet sample_ring(const Domain& domain, std::size_t n, double delta, RngStream& rng);

/// n points (x, t0) on the initial surface of a SpaceTime domain.
PointSet sample_initial(const Domain& spacetime, std::size_t n, RngStream& rng);

}  // namespace dualpinn
