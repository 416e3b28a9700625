#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dualpinn/bench.hpp"
#include "dualpinn/config.hpp"
#include "dualpinn/errors.hpp"
#include "dualpinn/geometry.hpp"
#include "dualpinn/nets.hpp"
#include "dualpinn/objective.hpp"
#include "dualpinn/physics.hpp"
#include "dualpinn/rng.hpp"

namespace dualpinn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ParamGrads m;  // first moments
  ParamGrads v;  // second moments
  long step = 0;
};

AdamState make_adam_state(const MlpParams& params);

/// Bias-corrected Adam update, in place. Aborts on non-finite gradients.
void adam_step(MlpParams& params, const ParamGrads& grads, AdamState& state,
               const AdamConfig& config);

enum class SamplerKind { Uniform, RingMix, BoundaryOnly, Grid };
enum class PhaseName { Warmup, Phase1, Phase2, FPData, FPResidual, FPJoint };
const char* phase_label(PhaseName name);

/// One training phase: which losses are active, what gets sampled, which
/// networks train, and how the schedules behave.
struct PhasePlan {
  PhaseName name = PhaseName::Phase1;
  int epochs = 0;
  SamplerKind sampler = SamplerKind::Uniform;
  int n_interior = 0;
  int resample_every = 1;  // 0 = one fixed set sampled at phase start

  bool train_domain = true;
  bool train_boundary = true;

  bool use_physics = true;
  bool use_alm = true;
  bool use_role = true;
  bool use_modal = false;
  bool use_normalization = false;
  bool use_data = false;
  bool use_pinning = false;
  bool use_warmup = false;

  bool anneal = false;       // cosine-anneal gamma and w_bc across this phase
  int schedule_offset = 0;   // t offset into the schedule (global-anneal mode)
  int schedule_total = 0;    // T; 0 = this phase's epoch count
  double role_weight_override = -1.0;  // >= 0: constant gamma for this phase
};

struct EarlyStopConfig {
  int patience = 200;
  double min_delta = 1e-6;
  bool restore_best = true;
};

struct EpochRecord {
  int epoch = 0;  // phase-local, 0-based
  PhaseName phase = PhaseName::Phase1;
  LossBreakdown loss;
  double rho = 0.0;
  double lambda_norm = 0.0;  // sqrt of the pooled squared multipliers
  double validation_rel_l2 = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
};

struct TrainTrace {
  std::vector<EpochRecord> records;
};

/// One ALM constraint set: fixed points, aligned multipliers, and the jet
/// channel the violation reads (value, or du/dt for the wave IC velocity).
struct ConstraintSet {
  std::string label;  // "bc", "ic", "ic_t"
  enum class Channel { Value, TimeDerivative } channel = Channel::Value;
  PointSet points;
  std::vector<double> targets;
  AlmState alm;
  std::vector<double> last_violation;
};

/// Mutable state threaded through the phases of one run.
struct TrainSession {
  PdeProblem problem;
  RunConfig config;
  DualNets nets;
  AdamState adam_domain;
  AdamState adam_boundary;
  std::vector<ConstraintSet> constraints;

  // Fokker-Planck extras
  std::vector<double> fp_norm_grid;   // normalization grid coordinates
  std::vector<double> fp_endpoints;   // the two interval endpoints
  std::vector<double> pseudo_points;  // pseudo-measurement coordinates
  std::vector<double> pseudo_targets;

  RngStream rng{0};
};

struct AlmSnapshot {
  std::string label;
  AlmState state;
};

struct RunResult {
  DualNets nets;
  TrainTrace trace;
  MetricsRecord metrics;
  std::vector<AlmSnapshot> alm;
  int epochs_run = 0;
  double wall_seconds = 0.0;
};

/// Thrown when training aborts (non-finite loss): carries the best-so-far
/// parameters and the partial trace so callers can preserve them.
class TrainingAbort : public TrainingError {
 public:
  TrainingAbort(const std::string& msg, DualNets best, TrainTrace trace)
      : TrainingError(msg), best_nets(std::move(best)), partial_trace(std::move(trace)) {}

  DualNets best_nets;
  TrainTrace partial_trace;
};

PdeProblem make_problem(const RunConfig& config);

/// Effective ring width / role decay length (resolves the 0 = auto defaults).
double effective_ring_delta(const RunConfig& config, const PdeProblem& problem);
double effective_role_tau(const RunConfig& config, const PdeProblem& problem);

/// Runs one phase, mutating the session. Returns the per-epoch trace.
TrainTrace train_phase(TrainSession& session, const PhasePlan& plan,
                       const EarlyStopConfig& stop);

/// Phase 0 (optional warm-up) + Phase 1 + Phase 2 per the config's mode.
RunResult run_protocol(const PdeProblem& problem, const RunConfig& config);

/// Three-phase sequential Fokker-Planck protocol: data prior on u_B, frozen
/// u_B physics residual for u_D, joint fine-tune with a mild role prior.
RunResult run_sequential_fp(const RunConfig& config);

/// Dispatches on config.curriculum.
RunResult run_one(const RunConfig& config);

struct Checkpoint {
  DualNets nets;
  std::vector<AlmSnapshot> alm;
  int epoch = 0;
};

/// Versioned JSON checkpoint; doubles round-trip bit-exactly.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dualpinn
