#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dualpinn/nets.hpp"
#include "dualpinn/physics.hpp"

namespace dualpinn {

/// The six evaluation metrics of one run plus bookkeeping.
struct MetricsRecord {
  double mae = 0.0;
  double rmse = 0.0;
  double rel_l2 = 0.0;
  double accuracy_pct = 0.0;  // 100 * (1 - rel_l2); may go negative when rel_l2 > 1
  double boundary_l2 = 0.0;
  double pde_residual_l2 = 0.0;

  std::uint64_t seed = 0;
  std::string config_fingerprint;
  int epochs_run = 0;
  double wall_clock_s = 0.0;
  bool failed = false;
  std::string fail_reason;
};

/// Deterministic test grids (uniform, not random): regression-stable.
struct GridSpec {
  int n_1d = 256;              // 1-D interior grid
  int n_2d = 100;              // per axis, 2-D / space-time lattice
  int boundary_per_edge = 1000;
  int boundary_per_face = 500;  // per spatial face, space-time
};

using JetOracle = std::function<Jet2(std::span<const double>)>;

/// Metrics of any jet-producing solution candidate against the exact solution.
MetricsRecord evaluate_oracle(const JetOracle& oracle, const PdeProblem& problem,
                              const GridSpec& grid = {});

/// Metrics of the summed network prediction.
MetricsRecord evaluate(const DualNets& nets, const PdeProblem& problem,
                       const GridSpec& grid = {});

/// Interior relative L2 error only, on a coarse grid (trace logging).
double validation_rel_l2(const DualNets& nets, const PdeProblem& problem, int n_per_axis = 48);

struct SweepSummary {
  std::vector<MetricsRecord> records;  // input order
  MetricsRecord mean;
  MetricsRecord stddev;  // population (n) denominator; see aggregate()
  int n_ok = 0;
};

/// Mean and population standard deviation over the non-failed records.
/// The population denominator is what reproduces the reference tables'
/// printed mean +- std arithmetic.
SweepSummary aggregate(const std::vector<MetricsRecord>& records);

struct SliceRow {
  double coord = 0.0;
  double u_pred = 0.0;
  double u_exact = 0.0;
  double abs_err = 0.0;
};

/// 512-point slice through a 2-D solution for external plotting. `axis` names
/// the frozen coordinate: 'y' (Rect) or 't' (SpaceTime) freezes that value
/// and sweeps x; 'x' freezes x and sweeps the other coordinate.
std::vector<SliceRow> slice(const DualNets& nets, const PdeProblem& problem, char axis,
                            double value, int n = 512);

}  // namespace dualpinn
