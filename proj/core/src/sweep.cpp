#include "dualpinn/sweep.hpp"

#include <atomic>
#include <thread>

#include "dualpinn/parallel.hpp"

namespace dualpinn {

SweepSummary sweep(const RunConfig& config, const std::vector<std::uint64_t>& seeds, int jobs,
                   const SweepCallbacks& callbacks) {
  if (seeds.empty()) throw ConfigError("sweep: need at least one seed");
  std::vector<MetricsRecord> records(seeds.size());

  auto run_index = [&](std::size_t i) {
    RunConfig cfg = config;
    cfg.seed = seeds[i];
    try {
      RunResult result = run_one(cfg);
      if (callbacks.on_success) callbacks.on_success(cfg, result);
      records[i] = result.metrics;
    } catch (const TrainingAbort& abort) {
      MetricsRecord failed;
      failed.failed = true;
      failed.fail_reason = abort.what();
      failed.seed = cfg.seed;
      failed.config_fingerprint = config_fingerprint(cfg);
      const double nan = std::numeric_limits<double>::quiet_NaN();
      failed.mae = failed.rmse = failed.rel_l2 = failed.accuracy_pct = nan;
      failed.boundary_l2 = failed.pde_residual_l2 = nan;
      records[i] = failed;
      if (callbacks.on_failure) callbacks.on_failure(cfg, abort);
    }
  };

  jobs = std::max(1, std::min<int>(jobs, worker_count()));
  if (jobs == 1 || seeds.size() == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) run_index(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(jobs, static_cast<int>(seeds.size()));
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < seeds.size(); i = next.fetch_add(1))
          run_index(i);
      });
    for (auto& th : pool) th.join();
  }

  return aggregate(records);
}

}  // namespace dualpinn
