#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dualpinn/diffnet.hpp"
#include "dualpinn/physics.hpp"

namespace dualpinn {

/// Augmented Lagrangian state for one constraint set: per-point multipliers
/// plus the (rho, Lambda, eta, rho_max, k, h) schedule parameters.
struct AlmState {
  std::vector<double> lambdas;
  double rho = 1.0;
  double lambda_max = 100.0;  // clip bound Lambda
  double eta = 2.0;           // rho ramp factor
  double rho_max = 100.0;
  int update_every = 50;      // k, epochs between multiplier updates
  int ramp_every = 500;       // h, epochs between rho ramps
};

AlmState make_alm_state(std::size_t n_points, double rho0, double lambda_max, double eta,
                        double rho_max, int update_every, int ramp_every);

/// w_bd(d) = exp(-d/tau); the companion interior weight is 1 - w_bd.
double boundary_weight(double d, double tau);

struct GammaSchedule {
  double gamma_min = 0.01;
  double gamma_max = 1.0;
  int total_epochs = 1;  // T
};

/// Cosine annealing gamma_min + (gamma_max-gamma_min)(1+cos(pi t/T))/2.
/// Exact at t=0, t=T and t=T/2; t outside [0,T] clamps with a warning.
double gamma(const GammaSchedule& schedule, double t);

struct RolePriorConfig {
  double tau = 0.1;
  double alpha_int = 1.0;
  double alpha_bd = 1.0;
  bool boundary_term = false;  // optional extra penalty on u_B restricted to the boundary
};

/// Shared physics residual loss: mean r^2 over the batch where r is evaluated
/// on the componentwise sum of both networks' jets. The returned cotangents
/// (2/N) r dr/djet are identical for both networks.
struct PhysicsLoss {
  double value = 0.0;
  std::vector<JetCotangent> cotangents;  // one per point, shared by both nets
};

PhysicsLoss physics_loss(const PdeProblem& problem, std::span<const double> points,
                         std::span<const Jet2> jets_domain, std::span<const Jet2> jets_boundary);

/// mean_i [lambda_i c_i + (rho/2) c_i^2] and its derivative per violation.
struct AlmPenalty {
  double value = 0.0;
  std::vector<double> d_violation;  // (lambda_i + rho c_i)/N
};

AlmPenalty alm_penalty(const AlmState& state, std::span<const double> c);

/// lambda_i <- clip(lambda_i + rho c_i, [-Lambda, Lambda]).
void alm_update(AlmState& state, std::span<const double> c);

/// rho <- min(eta rho, rho_max).
void rho_ramp(AlmState& state);

/// alpha_int mean[w_bd u_D^2] + alpha_bd mean[w_in u_B^2] with value-channel
/// cotangents for each network. u_boundary may be empty (one-net mode).
struct RoleLoss {
  double value = 0.0;
  std::vector<double> d_u_domain;
  std::vector<double> d_u_boundary;
};

RoleLoss role_loss(std::span<const double> boundary_dists, std::span<const double> u_domain,
                   std::span<const double> u_boundary, const RolePriorConfig& config);

struct ModalPriorConfig {
  std::vector<int> modes = {1, 4};
  double weight = 1.0;
  int quad_points = 128;
  int time_samples = 16;
};

/// Modal trajectory prior for the wave problem: for each mode n, the Fourier
/// coefficient a_n(t) of the summed prediction is pulled toward
/// a_n(0) cos(c n pi t) over a midpoint grid of sampled times. Returns the
/// quadrature node coordinates and the value-channel cotangent at each node.
struct ModalLoss {
  double value = 0.0;
  std::vector<double> node_coords;  // m*(Q+1) x 2, row-major (x, t)
  std::vector<double> d_value;      // per node
};

ModalLoss modal_prior_loss(const PdeProblem& problem,
                           const std::function<double(double, double)>& u_sum,
                           const ModalPriorConfig& config);

/// Mean squared mismatch; fills d_pred with 2(pred-target)/N when requested.
double mse_loss(std::span<const double> pred, std::span<const double> target,
                std::vector<double>* d_pred = nullptr);

/// Boundary warm-up loss: MSE of the summed prediction against g.
double warmup_loss(std::span<const double> u_sum, std::span<const double> g,
                   std::vector<double>* d_u = nullptr);

/// (mass - 1)^2.
double fp_constraint_loss(double mass);

/// MSE of u_B against pseudo-measurements of the exact solution.
double data_loss(std::span<const double> u_boundary_net, std::span<const double> targets,
                 std::vector<double>* d_u = nullptr);

/// Mean of u_D^2 at the domain endpoints.
double pinning_loss(std::span<const double> u_domain_at_endpoints,
                    std::vector<double>* d_u = nullptr);

/// Assembled per-epoch loss decomposition. Parts are stored unweighted; the
/// schedule weights actually applied are stored alongside so the weighted
/// total can be re-derived exactly.
struct LossBreakdown {
  double physics = 0.0;
  std::vector<double> alm_sets;  // one entry per constraint set
  double role = 0.0;
  double modal = 0.0;
  double normalization = 0.0;
  double data = 0.0;
  double pinning = 0.0;
  double warmup = 0.0;

  double gamma_weight = 0.0;    // applied to role
  double wbc_weight = 1.0;      // applied to every ALM set
  double modal_weight = 1.0;
  double norm_weight = 1.0;
  double data_weight = 1.0;
  double pinning_weight = 1.0;

  double total = 0.0;
};

/// Computes the weighted total in a fixed summation order and validates that
/// every part is finite; a non-finite part aborts with a message naming it.
void total_loss(LossBreakdown& breakdown);

}  // namespace dualpinn
