#include "dualpinn/bench.hpp"

#include <array>
#include <cmath>
#include <string>

#include "dualpinn/errors.hpp"

namespace dualpinn {

namespace {

std::vector<double> interior_grid(const PdeProblem& problem, const GridSpec& grid) {
  const Domain& d = problem.domain;
  std::vector<double> pts;
  if (d.dim() == 1) {
    const int n = grid.n_1d;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      pts.push_back(d.lo[0] + (d.hi[0] - d.lo[0]) * i / static_cast<double>(n - 1));
  } else {
    const int n = grid.n_2d;
    pts.reserve(static_cast<std::size_t>(n) * n * 2);
    for (int i = 0; i < n; ++i) {
      const double x = d.lo[0] + (d.hi[0] - d.lo[0]) * i / static_cast<double>(n - 1);
      for (int j = 0; j < n; ++j) {
        const double y = d.lo[1] + (d.hi[1] - d.lo[1]) * j / static_cast<double>(n - 1);
        pts.push_back(x);
        pts.push_back(y);
      }
    }
  }
  return pts;
}

std::vector<double> boundary_grid(const PdeProblem& problem, const GridSpec& grid) {
  const Domain& d = problem.domain;
  std::vector<double> pts;
  switch (d.kind) {
    case Domain::Kind::Interval:
      pts = {d.lo[0], d.hi[0]};
      break;
    case Domain::Kind::Rect: {
      const int n = grid.boundary_per_edge;
      auto lin = [n](double lo, double hi, int i) {
        return lo + (hi - lo) * i / static_cast<double>(n - 1);
      };
      for (int i = 0; i < n; ++i) {
        pts.push_back(lin(d.lo[0], d.hi[0], i));
        pts.push_back(d.lo[1]);
      }
      for (int i = 0; i < n; ++i) {
        pts.push_back(lin(d.lo[0], d.hi[0], i));
        pts.push_back(d.hi[1]);
      }
      for (int i = 0; i < n; ++i) {
        pts.push_back(d.lo[0]);
        pts.push_back(lin(d.lo[1], d.hi[1], i));
      }
      for (int i = 0; i < n; ++i) {
        pts.push_back(d.hi[0]);
        pts.push_back(lin(d.lo[1], d.hi[1], i));
      }
      break;
    }
    case Domain::Kind::SpaceTime: {
      const int n = grid.boundary_per_face;
      for (int i = 0; i < n; ++i) {
        const double t = d.lo[1] + (d.hi[1] - d.lo[1]) * i / static_cast<double>(n - 1);
        pts.push_back(d.lo[0]);
        pts.push_back(t);
      }
      for (int i = 0; i < n; ++i) {
        const double t = d.lo[1] + (d.hi[1] - d.lo[1]) * i / static_cast<double>(n - 1);
        pts.push_back(d.hi[0]);
        pts.push_back(t);
      }
      break;
    }
  }
  return pts;
}

}  // namespace

MetricsRecord evaluate_oracle(const JetOracle& oracle, const PdeProblem& problem,
                              const GridSpec& grid) {
  const std::size_t dim = static_cast<std::size_t>(problem.dim());
  MetricsRecord m;

  // Interior metrics + PDE residual on the same grid.
  const std::vector<double> pts = interior_grid(problem, grid);
  const std::size_t n = pts.size() / dim;
  double abs_sum = 0.0, sq_sum = 0.0, exact_sq_sum = 0.0, res_sq_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> x{pts.data() + i * dim, dim};
    const Jet2 jet = oracle(x);
    const double ue = exact_u(problem, x);
    const double err = jet.value - ue;
    abs_sum += std::abs(err);
    sq_sum += err * err;
    exact_sq_sum += ue * ue;
    const double r = residual(problem, x, jet).r;
    res_sq_sum += r * r;
  }
  const double nn = static_cast<double>(n);
  m.mae = abs_sum / nn;
  m.rmse = std::sqrt(sq_sum / nn);
  m.rel_l2 = exact_sq_sum > 0.0 ? std::sqrt(sq_sum) / std::sqrt(exact_sq_sum)
                                : std::sqrt(sq_sum);
  m.accuracy_pct = 100.0 * (1.0 - m.rel_l2);
  m.pde_residual_l2 = std::sqrt(res_sq_sum / nn);

  // Boundary satisfaction on a dense boundary grid.
  const std::vector<double> bpts = boundary_grid(problem, grid);
  const std::size_t nb = bpts.size() / dim;
  double bsq = 0.0;
  for (std::size_t i = 0; i < nb; ++i) {
    const std::span<const double> x{bpts.data() + i * dim, dim};
    const double e = oracle(x).value - boundary_value(problem, x);
    bsq += e * e;
  }
  m.boundary_l2 = std::sqrt(bsq / static_cast<double>(nb));
  return m;
}

MetricsRecord evaluate(const DualNets& nets, const PdeProblem& problem, const GridSpec& grid) {
  return evaluate_oracle([&](std::span<const double> x) { return nets_jet(nets, x); }, problem,
                         grid);
}

double validation_rel_l2(const DualNets& nets, const PdeProblem& problem, int n_per_axis) {
  GridSpec g;
  g.n_1d = n_per_axis;
  g.n_2d = n_per_axis;
  const std::size_t dim = static_cast<std::size_t>(problem.dim());
  const std::vector<double> pts = interior_grid(problem, g);
  const std::size_t n = pts.size() / dim;
  double sq = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> x{pts.data() + i * dim, dim};
    const double e = nets_value(nets, x) - exact_u(problem, x);
    const double ue = exact_u(problem, x);
    sq += e * e;
    ref += ue * ue;
  }
  return ref > 0.0 ? std::sqrt(sq / ref) : std::sqrt(sq);
}

SweepSummary aggregate(const std::vector<MetricsRecord>& records) {
  SweepSummary s;
  s.records = records;
  std::vector<const MetricsRecord*> ok;
  for (const auto& r : records)
    if (!r.failed) ok.push_back(&r);
  s.n_ok = static_cast<int>(ok.size());
  if (ok.empty()) return s;

  auto fields = [](const MetricsRecord& r) {
    return std::array<double, 6>{r.mae, r.rmse, r.rel_l2, r.accuracy_pct, r.boundary_l2,
                                 r.pde_residual_l2};
  };
  auto assign = [](MetricsRecord& r, const std::array<double, 6>& v) {
    r.mae = v[0];
    r.rmse = v[1];
    r.rel_l2 = v[2];
    r.accuracy_pct = v[3];
    r.boundary_l2 = v[4];
    r.pde_residual_l2 = v[5];
  };

  std::array<double, 6> mean{};
  for (const auto* r : ok) {
    const auto f = fields(*r);
    for (std::size_t i = 0; i < 6; ++i) mean[i] += f[i];
  }
  for (auto& v : mean) v /= static_cast<double>(ok.size());

  std::array<double, 6> var{};
  for (const auto* r : ok) {
    const auto f = fields(*r);
    for (std::size_t i = 0; i < 6; ++i) var[i] += (f[i] - mean[i]) * (f[i] - mean[i]);
  }
  std::array<double, 6> sd{};
  for (std::size_t i = 0; i < 6; ++i)
    sd[i] = std::sqrt(var[i] / static_cast<double>(ok.size()));

  assign(s.mean, mean);
  assign(s.stddev, sd);
  return s;
}

std::vector<SliceRow> slice(const DualNets& nets, const PdeProblem& problem, char axis,
                            double value, int n) {
  const Domain& d = problem.domain;
  if (d.dim() != 2) throw ConfigError("slice: requires a 2-D problem");
  int frozen;  // coordinate index held fixed
  if (axis == 'x')
    frozen = 0;
  else if (axis == 'y' && d.kind == Domain::Kind::Rect)
    frozen = 1;
  else if (axis == 't' && d.kind == Domain::Kind::SpaceTime)
    frozen = 1;
  else
    throw ConfigError(std::string("slice: axis '") + axis + "' not valid for this problem");
  if (value < d.lo[frozen] || value > d.hi[frozen])
    throw ConfigError("slice: axis value outside the domain");

  const int sweep = 1 - frozen;
  std::vector<SliceRow> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x[2];
    x[frozen] = value;
    x[sweep] = d.lo[sweep] + (d.hi[sweep] - d.lo[sweep]) * i / static_cast<double>(n - 1);
    SliceRow row;
    row.coord = x[sweep];
    row.u_pred = nets_value(nets, {x, 2});
    row.u_exact = exact_u(problem, {x, 2});
    row.abs_err = std::abs(row.u_pred - row.u_exact);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dualpinn
