#pragma once

#include <functional>
#include <vector>

#include "dualpinn/bench.hpp"
#include "dualpinn/trainer.hpp"

namespace dualpinn {

/// Per-run hooks, invoked from worker threads. Either may be empty.
struct SweepCallbacks {
  std::function<void(const RunConfig&, const RunResult&)> on_success;
  std::function<void(const RunConfig&, const TrainingAbort&)> on_failure;
};

/// Independent runs of `config` with each seed substituted in. Aborted runs
/// are recorded as failed rows and excluded from the aggregate. Results are
/// ordered by the input seed list regardless of `jobs`.
SweepSummary sweep(const RunConfig& config, const std::vector<std::uint64_t>& seeds,
                   int jobs = 1, const SweepCallbacks& callbacks = {});

}  // namespace dualpinn
