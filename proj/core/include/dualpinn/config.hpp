#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dualpinn {

struct NetSpec {
  std::vector<int> hidden = {48, 48, 48, 48, 48, 48};
  std::string activation = "tanh";  // tanh | sine
  double omega0 = 30.0;             // sine only

  bool operator==(const NetSpec&) const = default;
};

/// Full experiment description. Parsed from a JSON config file with closed
/// world validation (unknown keys rejected); every field below is the
/// documented default.
struct RunConfig {
  // problem
  std::string problem = "poisson";  // poisson | laplace | fokker_planck | wave
  double fp_a = 0.3, fp_b = 0.5, fp_sigma = 0.5, fp_dx = 0.01;
  double fp_xmin = -2.5, fp_xmax = 2.5;
  double wave_c = 2.0;

  // mode
  std::string nets = "dual_net";        // one_net | dual_net
  std::string curriculum = "two_phase"; // one_phase | two_phase | sequential_fp

  NetSpec domain_net;
  NetSpec boundary_net{{16, 16, 16}, "tanh", 30.0};

  // sampling
  int n_boundary_per_edge = 300;  // LHS per edge (Rect) / per spatial face (SpaceTime)
  int n_interior_phase1 = 7000;
  int n_interior_phase2 = 8000;
  int n_initial = 500;        // wave initial-surface points
  double ring_delta = 0.0;    // 0 = 0.1 * domain diameter
  double ring_fraction = 0.5; // ring share of Phase-2 points
  int resample_every = 1;     // interior resampling cadence; 0 = fixed set

  // augmented Lagrangian
  double alm_rho0 = 1.0, alm_rho_max = 100.0, alm_eta = 2.0, alm_lambda_max = 100.0;
  int alm_update_every = 50, alm_ramp_every = 500;
  bool alm_multiplier_updates = true;  // false = fixed-penalty ablation

  // role priors
  bool role_priors = true;
  double role_tau = 0.0;  // 0 = 0.1 * domain diameter
  double role_alpha_int = 1.0, role_alpha_bd = 1.0;
  bool role_boundary_term = false;

  // schedules
  double gamma_min = 0.01, gamma_max = 1.0;
  double wbc_min = 1.0, wbc_max = 10.0;
  bool anneal_gamma = true;               // false = fixed-gamma ablation
  bool phase1_constant_schedules = true;  // false = single global anneal across both phases
  bool ring_phase2 = true;                // false = uniform-Phase-2 ablation

  // modal prior (wave)
  bool modal_enabled = false;
  std::vector<int> modal_modes = {1, 4};
  double modal_weight = 1.0;
  int modal_quad_points = 128;
  int modal_time_samples = 16;

  // Fokker-Planck extras
  double fp_norm_weight = 1.0;
  int fp_pseudo_points = 200;
  double fp_data_weight = 1.0;
  double fp_pinning_weight = 1.0;
  double fp_joint_role_weight = 0.01;

  // optimizer
  double lr = 1e-3, adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;

  // training
  int warmup_epochs = 0;
  int phase1_epochs = 2000, phase2_epochs = 2000;
  int fp_data_epochs = 2000, fp_residual_epochs = 2000, fp_joint_epochs = 1000;
  double epoch_scale = 1.0;
  int patience = 200;
  double min_delta = 1e-6;
  bool restore_best = true;
  int trace_validation_every = 0;  // 0 = off

  std::uint64_t seed = 42;
  std::string out_dir = "runs";

  bool operator==(const RunConfig&) const = default;

  std::string mode_string() const { return nets + "_" + curriculum; }

  /// Semantic validation beyond schema checks; throws ConfigError.
  void validate() const;
};

/// Loads a config file, resolving its `extends` chain (paths relative to the
/// file). Throws ConfigError with file/position anchored messages.
RunConfig load_config(const std::string& path);

/// Parses a JSON document (no extends resolution).
RunConfig parse_config(const std::string& json_text, const std::string& source_name);

/// Canonical JSON serialization; parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Stable 16-hex-digit run id derived from the canonical config serialization
/// (which includes the seed).
std::string config_fingerprint(const RunConfig& config);

}  // namespace dualpinn
