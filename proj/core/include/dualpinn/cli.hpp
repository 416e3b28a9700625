#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dualpinn/bench.hpp"
#include "dualpinn/config.hpp"
#include "dualpinn/sweep.hpp"
#include "dualpinn/trainer.hpp"

namespace dualpinn {

/// Shortest round-trip decimal representation (stable across locales).
std::string format_double(double v);

std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& run_id, const std::string& problem,
                            const std::string& mode, const MetricsRecord& m);

/// Writes metrics.csv, trace.csv, slice CSVs, checkpoint.json and run.log
/// under <out_dir>/<run_id>/. Returns the run directory.
std::string write_run_artifacts(const RunConfig& config, const RunResult& result);

/// Preserves the partial trace and best checkpoint of an aborted run.
std::string write_abort_artifacts(const RunConfig& config, const TrainingAbort& abort);

/// Renders per-seed rows plus the mean +- std row in the reference column
/// order (MAE, RMSE, Rel. L2, Accuracy, Boundary L2, PDE residual L2).
std::string render_summary_table(const std::string& title, const SweepSummary& summary);

struct CliOptions {
  std::string config_path;
  std::vector<std::uint64_t> seeds;  // empty = use the config seed
  int jobs = 1;
  std::optional<std::string> out_dir;
  std::optional<double> epoch_scale;
};

int cmd_run(const CliOptions& options);
int cmd_sweep(const CliOptions& options);
int cmd_ablate(const CliOptions& options);
int cmd_report(const std::string& results_dir);

/// Full argument parser; returns the process exit code
/// (0 success, 1 training failure, 2 usage/config error).
int cli_main(int argc, const char* const* argv);

}  // namespace dualpinn
