#include "dualpinn/cli.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "dualpinn/parallel.hpp"

namespace dualpinn {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

bool timing_enabled() {
  const char* env = std::getenv("DUALPINN_TIMING");
  return env && std::string(env) == "1";
}

std::string csv_value(double v) { return format_double(v); }

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

std::string trace_csv(const TrainTrace& trace) {
  std::string out =
      "epoch,phase,physics,alm,role,modal,normalization,data,pinning,warmup,total,"
      "gamma,w_bc,rho,lambda_norm,val_rel_l2,wall_ms\n";
  for (const auto& r : trace.records) {
    double alm_sum = 0.0;
    for (double v : r.loss.alm_sets) alm_sum += v;
    out += std::to_string(r.epoch);
    out += ",";
    out += phase_label(r.phase);
    for (double v : {r.loss.physics, alm_sum, r.loss.role, r.loss.modal, r.loss.normalization,
                     r.loss.data, r.loss.pinning, r.loss.warmup, r.loss.total,
                     r.loss.gamma_weight, r.loss.wbc_weight, r.rho, r.lambda_norm}) {
      out += ",";
      out += csv_value(v);
    }
    out += ",";
    if (!std::isnan(r.validation_rel_l2)) out += csv_value(r.validation_rel_l2);
    out += ",";
    out += csv_value(r.wall_ms);
    out += "\n";
  }
  return out;
}

std::string slice_csv(const std::vector<SliceRow>& rows) {
  std::string out = "coord,u_pred,u_exact,abs_err\n";
  for (const auto& r : rows) {
    out += csv_value(r.coord);
    out += ",";
    out += csv_value(r.u_pred);
    out += ",";
    out += csv_value(r.u_exact);
    out += ",";
    out += csv_value(r.abs_err);
    out += "\n";
  }
  return out;
}

fs::path ensure_run_dir(const RunConfig& config) {
  fs::path dir = fs::path(config.out_dir) / config_fingerprint(config);
  fs::create_directories(dir);
  return dir;
}

std::string run_log(const RunConfig& config, const std::string& status, double wall_s,
                    const std::string& extra) {
  std::ostringstream log;
  log << "run_id: " << config_fingerprint(config) << "\n"
      << "problem: " << config.problem << "\n"
      << "mode: " << config.mode_string() << "\n"
      << "seed: " << config.seed << "\n"
      << "status: " << status << "\n"
      << "wall_clock_s: " << wall_s << "\n";
  if (!extra.empty()) log << extra << "\n";
  return log.str();
}

// Human-readable metric formatting for tables (CSV files keep full precision).
std::string fmt_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string metrics_csv_header() {
  return "run_id,problem,mode,seed,mae,rmse,rel_l2,accuracy_pct,boundary_l2,"
         "pde_residual_l2,epochs_run,wall_clock_s\n";
}

std::string metrics_csv_row(const std::string& run_id, const std::string& problem,
                            const std::string& mode, const MetricsRecord& m) {
  std::string out = run_id + "," + problem + "," + mode + "," + std::to_string(m.seed);
  for (double v : {m.mae, m.rmse, m.rel_l2, m.accuracy_pct, m.boundary_l2, m.pde_residual_l2}) {
    out += ",";
    out += csv_value(v);
  }
  out += "," + std::to_string(m.epochs_run);
  out += "," + csv_value(timing_enabled() ? m.wall_clock_s : 0.0);
  out += "\n";
  return out;
}

std::string write_run_artifacts(const RunConfig& config, const RunResult& result) {
  const fs::path dir = ensure_run_dir(config);
  const std::string run_id = config_fingerprint(config);

  write_text_file(dir / "metrics.csv",
                  metrics_csv_header() +
                      metrics_csv_row(run_id, config.problem, config.mode_string(), result.metrics));
  write_text_file(dir / "trace.csv", trace_csv(result.trace));

  const PdeProblem problem = make_problem(config);
  if (problem.domain.kind == Domain::Kind::Rect)
    write_text_file(dir / "slice_y0.8.csv", slice_csv(slice(result.nets, problem, 'y', 0.8)));
  else if (problem.domain.kind == Domain::Kind::SpaceTime)
    write_text_file(dir / "slice_t0.5.csv", slice_csv(slice(result.nets, problem, 't', 0.5)));

  save_checkpoint((dir / "checkpoint.json").string(),
                  Checkpoint{result.nets, result.alm, result.epochs_run});
  write_text_file(dir / "run.log", run_log(config, "ok", result.wall_seconds, ""));
  return dir.string();
}

std::string write_abort_artifacts(const RunConfig& config, const TrainingAbort& abort) {
  const fs::path dir = ensure_run_dir(config);
  write_text_file(dir / "trace.csv", trace_csv(abort.partial_trace));
  save_checkpoint((dir / "checkpoint.json").string(),
                  Checkpoint{abort.best_nets, {},
                             static_cast<int>(abort.partial_trace.records.size())});
  write_text_file(dir / "run.log",
                  run_log(config, "aborted", 0.0, std::string("reason: ") + abort.what()));
  return dir.string();
}

std::string render_summary_table(const std::string& title, const SweepSummary& summary) {
  std::ostringstream out;
  out << title << "\n";
  out << "  seed        MAE       RMSE    Rel. L2   Accuracy(%)  Boundary L2  PDE resid L2\n";
  for (const auto& r : summary.records) {
    if (r.failed) {
      out << "  " << r.seed << "  FAILED: " << r.fail_reason << "\n";
      continue;
    }
    char line[200];
    std::snprintf(line, sizeof(line), "  %-6llu %10s %10s %10s %12.2f %12s %13s\n",
                  static_cast<unsigned long long>(r.seed), fmt_metric(r.mae).c_str(),
                  fmt_metric(r.rmse).c_str(), fmt_metric(r.rel_l2).c_str(), r.accuracy_pct,
                  fmt_metric(r.boundary_l2).c_str(), fmt_metric(r.pde_residual_l2).c_str());
    out << line;
  }
  if (summary.n_ok > 0) {
    char line[256];
    std::snprintf(line, sizeof(line),
                  "  mean   %10s %10s %10s %12.2f %12s %13s   (n=%d, +- pop. std)\n",
                  fmt_metric(summary.mean.mae).c_str(), fmt_metric(summary.mean.rmse).c_str(),
                  fmt_metric(summary.mean.rel_l2).c_str(), summary.mean.accuracy_pct,
                  fmt_metric(summary.mean.boundary_l2).c_str(),
                  fmt_metric(summary.mean.pde_residual_l2).c_str(), summary.n_ok);
    out << line;
    std::snprintf(line, sizeof(line), "  std    %10s %10s %10s %12.2f %12s %13s\n",
                  fmt_metric(summary.stddev.mae).c_str(), fmt_metric(summary.stddev.rmse).c_str(),
                  fmt_metric(summary.stddev.rel_l2).c_str(), summary.stddev.accuracy_pct,
                  fmt_metric(summary.stddev.boundary_l2).c_str(),
                  fmt_metric(summary.stddev.pde_residual_l2).c_str());
    out << line;
  }
  return out.str();
}

namespace {

RunConfig load_with_overrides(const CliOptions& options) {
  RunConfig config = load_config(options.config_path);
  if (options.out_dir) config.out_dir = *options.out_dir;
  if (options.epoch_scale) {
    config.epoch_scale = *options.epoch_scale;
    config.validate();
  }
  return config;
}

std::string sweep_metrics_csv(const RunConfig& config, const SweepSummary& summary) {
  std::string out = metrics_csv_header();
  for (const auto& r : summary.records) {
    RunConfig cfg = config;
    cfg.seed = r.seed;
    out += metrics_csv_row(r.config_fingerprint.empty() ? config_fingerprint(cfg)
                                                        : r.config_fingerprint,
                           config.problem, config.mode_string(), r);
  }
  if (summary.n_ok > 0) {
    auto stat_row = [&](const char* name, const MetricsRecord& m) {
      std::string row = std::string(name) + "," + config.problem + "," + config.mode_string() + ",";
      for (double v :
           {m.mae, m.rmse, m.rel_l2, m.accuracy_pct, m.boundary_l2, m.pde_residual_l2}) {
        row += ",";
        row += csv_value(v);
      }
      row += ",,\n";
      return row;
    };
    out += stat_row("mean", summary.mean);
    out += stat_row("std", summary.stddev);
  }
  return out;
}

}  // namespace

int cmd_run(const CliOptions& options) {
  RunConfig config = load_with_overrides(options);
  if (options.seeds.size() > 1)
    throw ConfigError("run takes at most one --seeds value; use sweep for several");
  if (options.seeds.size() == 1) config.seed = options.seeds[0];

  try {
    RunResult result = run_one(config);
    const std::string dir = write_run_artifacts(config, result);
    SweepSummary single = aggregate({result.metrics});
    std::fputs(render_summary_table(config.problem + " " + config.mode_string(), single).c_str(),
               stdout);
    std::fprintf(stdout, "artifacts: %s\n", dir.c_str());
    return 0;
  } catch (const TrainingAbort& abort) {
    const std::string dir = write_abort_artifacts(config, abort);
    std::fprintf(stderr, "training aborted: %s\npartial trace: %s\n", abort.what(), dir.c_str());
    return 1;
  }
}

int cmd_sweep(const CliOptions& options) {
  RunConfig config = load_with_overrides(options);
  std::vector<std::uint64_t> seeds = options.seeds;
  if (seeds.empty()) seeds.push_back(config.seed);

  SweepCallbacks callbacks;
  callbacks.on_success = [](const RunConfig& cfg, const RunResult& result) {
    write_run_artifacts(cfg, result);
  };
  callbacks.on_failure = [](const RunConfig& cfg, const TrainingAbort& abort) {
    write_abort_artifacts(cfg, abort);
  };

  SweepSummary summary = sweep(config, seeds, options.jobs, callbacks);

  fs::create_directories(config.out_dir);
  const fs::path csv_path = fs::path(config.out_dir) / "sweep_metrics.csv";
  write_text_file(csv_path, sweep_metrics_csv(config, summary));
  std::fputs(render_summary_table(config.problem + " " + config.mode_string(), summary).c_str(),
             stdout);
  std::fprintf(stdout, "sweep metrics: %s\n", csv_path.string().c_str());
  return summary.n_ok > 0 ? 0 : 1;
}

int cmd_ablate(const CliOptions& options) {
  RunConfig base = load_with_overrides(options);
  if (base.nets != "dual_net" || base.curriculum != "two_phase")
    throw ConfigError("ablate: the base config must be dual_net / two_phase");
  std::vector<std::uint64_t> seeds = options.seeds;
  if (seeds.empty()) seeds.push_back(base.seed);

  struct Variant {
    std::string name;
    RunConfig config;
  };
  std::vector<Variant> variants;
  variants.push_back({"full", base});
  {
    RunConfig c = base;
    c.role_priors = false;
    variants.push_back({"no_role_priors", c});
  }
  {
    RunConfig c = base;
    c.anneal_gamma = false;
    variants.push_back({"fixed_gamma", c});
  }
  {
    RunConfig c = base;
    c.alm_multiplier_updates = false;
    variants.push_back({"fixed_penalty", c});
  }
  {
    RunConfig c = base;
    c.ring_phase2 = false;
    variants.push_back({"uniform_phase2", c});
  }
  {
    RunConfig c = base;
    c.nets = "one_net";
    variants.push_back({"one_net", c});
  }

  struct Job {
    std::size_t variant;
    std::uint64_t seed;
  };
  std::vector<Job> jobs_list;
  for (std::size_t v = 0; v < variants.size(); ++v)
    for (std::uint64_t s : seeds) jobs_list.push_back({v, s});

  struct Row {
    MetricsRecord metrics;
    double final_role_loss = std::numeric_limits<double>::quiet_NaN();
    bool has_role = false;
  };
  std::vector<Row> rows(jobs_list.size());

  auto run_job = [&](std::size_t i) {
    RunConfig cfg = variants[jobs_list[i].variant].config;
    cfg.seed = jobs_list[i].seed;
    try {
      RunResult result = run_one(cfg);
      write_run_artifacts(cfg, result);
      rows[i].metrics = result.metrics;
      if (cfg.nets == "dual_net" && !result.trace.records.empty()) {
        rows[i].final_role_loss = result.trace.records.back().loss.role;
        rows[i].has_role = true;
      }
    } catch (const TrainingAbort& abort) {
      write_abort_artifacts(cfg, abort);
      rows[i].metrics.failed = true;
      rows[i].metrics.fail_reason = abort.what();
      rows[i].metrics.seed = cfg.seed;
    }
  };

  const int n_jobs = std::max(1, std::min<int>(options.jobs, worker_count()));
  if (n_jobs == 1) {
    for (std::size_t i = 0; i < jobs_list.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < n_jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < jobs_list.size(); i = next.fetch_add(1))
          run_job(i);
      });
    for (auto& th : pool) th.join();
  }

  // Side-by-side CSV plus per-variant aggregates.
  std::string csv =
      "variant,run_id,problem,mode,seed,mae,rmse,rel_l2,accuracy_pct,boundary_l2,"
      "pde_residual_l2,epochs_run,wall_clock_s,final_role_loss\n";
  std::string summary_csv =
      "variant,mean_mae,std_mae,mean_rmse,std_rmse,mean_rel_l2,std_rel_l2,"
      "mean_accuracy_pct,std_accuracy_pct,mean_boundary_l2,std_boundary_l2,"
      "mean_pde_residual_l2,std_pde_residual_l2,n_ok\n";
  std::string tables;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    std::vector<MetricsRecord> records;
    for (std::size_t i = 0; i < jobs_list.size(); ++i) {
      if (jobs_list[i].variant != v) continue;
      const Row& row = rows[i];
      RunConfig cfg = variants[v].config;
      cfg.seed = jobs_list[i].seed;
      std::string line = variants[v].name + ",";
      line += config_fingerprint(cfg) + "," + cfg.problem + "," + cfg.mode_string() + ",";
      line += std::to_string(jobs_list[i].seed);
      if (row.metrics.failed) {
        line += ",nan,nan,nan,nan,nan,nan,,,";
      } else {
        for (double val : {row.metrics.mae, row.metrics.rmse, row.metrics.rel_l2,
                           row.metrics.accuracy_pct, row.metrics.boundary_l2,
                           row.metrics.pde_residual_l2}) {
          line += ",";
          line += csv_value(val);
        }
        line += "," + std::to_string(row.metrics.epochs_run);
        line += "," + csv_value(timing_enabled() ? row.metrics.wall_clock_s : 0.0);
        line += ",";
        if (row.has_role) line += csv_value(row.final_role_loss);
      }
      csv += line + "\n";
      records.push_back(row.metrics);
    }
    SweepSummary agg = aggregate(records);
    summary_csv += variants[v].name;
    for (auto [m, sd] :
         {std::pair{agg.mean.mae, agg.stddev.mae}, std::pair{agg.mean.rmse, agg.stddev.rmse},
          std::pair{agg.mean.rel_l2, agg.stddev.rel_l2},
          std::pair{agg.mean.accuracy_pct, agg.stddev.accuracy_pct},
          std::pair{agg.mean.boundary_l2, agg.stddev.boundary_l2},
          std::pair{agg.mean.pde_residual_l2, agg.stddev.pde_residual_l2}}) {
      summary_csv += "," + csv_value(m) + "," + csv_value(sd);
    }
    summary_csv += "," + std::to_string(agg.n_ok) + "\n";
    tables += render_summary_table(base.problem + " ablation: " + variants[v].name, agg) + "\n";
  }

  fs::create_directories(base.out_dir);
  write_text_file(fs::path(base.out_dir) / "ablate.csv", csv);
  write_text_file(fs::path(base.out_dir) / "ablate_summary.csv", summary_csv);
  std::fputs(tables.c_str(), stdout);
  std::fprintf(stdout, "ablation CSVs in %s\n", base.out_dir.c_str());
  return 0;
}

namespace {

struct ParsedRow {
  std::string problem, mode;
  MetricsRecord metrics;
};

std::vector<ParsedRow> parse_metrics_file(const fs::path& path) {
  std::vector<ParsedRow> rows;
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) return rows;
  if (line + "\n" != metrics_csv_header()) return rows;  // not one of ours
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() < 12) continue;
    if (cols[0] == "mean" || cols[0] == "std") continue;  // aggregate rows
    ParsedRow row;
    row.problem = cols[1];
    row.mode = cols[2];
    try {
      row.metrics.seed = std::stoull(cols[3]);
      row.metrics.mae = std::stod(cols[4]);
      row.metrics.rmse = std::stod(cols[5]);
      row.metrics.rel_l2 = std::stod(cols[6]);
      row.metrics.accuracy_pct = std::stod(cols[7]);
      row.metrics.boundary_l2 = std::stod(cols[8]);
      row.metrics.pde_residual_l2 = std::stod(cols[9]);
    } catch (const std::exception&) {
      continue;
    }
    if (std::isnan(row.metrics.mae)) row.metrics.failed = true;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

int cmd_report(const std::string& results_dir) {
  if (!fs::exists(results_dir)) throw ConfigError("report: no such directory: " + results_dir);

  std::map<std::pair<std::string, std::string>, std::vector<MetricsRecord>> groups;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(results_dir))
    if (entry.is_regular_file() && (entry.path().filename() == "metrics.csv" ||
                                    entry.path().filename() == "sweep_metrics.csv"))
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  for (const auto& f : files)
    for (auto& row : parse_metrics_file(f))
      groups[{row.problem, row.mode}].push_back(row.metrics);

  if (groups.empty()) throw ConfigError("report: no metrics CSVs under " + results_dir);

  for (const auto& [key, records] : groups) {
    SweepSummary agg = aggregate(records);
    std::fputs(render_summary_table(key.first + " " + key.second, agg).c_str(), stdout);
    std::fputs("\n", stdout);
  }
  return 0;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"dual-network PINN trainer and benchmark harness"};
  app.require_subcommand(1);

  CliOptions options;
  std::string seeds_arg;
  std::string report_dir;

  auto add_common = [&](CLI::App* cmd, bool with_seeds) {
    cmd->add_option("--config", options.config_path, "experiment config file")->required();
    if (with_seeds) cmd->add_option("--seeds", seeds_arg, "comma-separated seed list");
    cmd->add_option("--jobs", options.jobs, "parallel runs");
    cmd->add_option("--out", options.out_dir, "output directory override");
    cmd->add_option("--epoch-scale", options.epoch_scale, "scale all phase epoch budgets");
  };

  CLI::App* run = app.add_subcommand("run", "train one configuration");
  add_common(run, true);
  CLI::App* sw = app.add_subcommand("sweep", "run one configuration across seeds");
  add_common(sw, true);
  CLI::App* ab = app.add_subcommand("ablate", "run the ablation grid against the full method");
  add_common(ab, true);
  CLI::App* rep = app.add_subcommand("report", "render mean +- std tables from results");
  rep->add_option("dir", report_dir, "results directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (!seeds_arg.empty()) {
      std::stringstream ss(seeds_arg);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        options.seeds.push_back(std::stoull(tok));
      }
      if (options.seeds.empty()) throw ConfigError("--seeds: empty seed list");
    }
    if (app.got_subcommand(run)) return cmd_run(options);
    if (app.got_subcommand(sw)) return cmd_sweep(options);
    if (app.got_subcommand(ab)) return cmd_ablate(options);
    if (app.got_subcommand(rep)) return cmd_report(report_dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const TrainingError& e) {
    std::fprintf(stderr, "training error: %s\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace dualpinn
