#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dualpinn/cli.hpp"
#include "dualpinn/config.hpp"
#include "dualpinn/errors.hpp"

using namespace dualpinn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::path("test_tmp") / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tiny_poisson_json(const std::string& out_dir, int epochs) {
  return R"({
    "problem": {"kind": "poisson"},
    "mode": {"nets": "dual_net", "curriculum": "one_phase"},
    "domain_net": {"hidden": [10, 10]},
    "boundary_net": {"hidden": [8]},
    "sampling": {"n_boundary_per_edge": 8, "n_interior_phase1": 48},
    "training": {"phase1_epochs": )" +
         std::to_string(epochs) + R"(, "patience": 100000},
    "seed": 42,
    "out_dir": ")" +
         out_dir + R"("
  })";
}

}  // namespace

TEST_CASE("config round-trips through serialization") {
  RunConfig c;
  CHECK(parse_config(serialize_config(c), "<mem>") == c);

  c.problem = "wave";
  c.modal_enabled = true;
  c.modal_modes = {1, 4};
  c.domain_net.activation = "sine";
  c.domain_net.omega0 = 25.0;
  c.seed = 1234567890123ull;
  c.epoch_scale = 0.125;
  CHECK(parse_config(serialize_config(c), "<mem>") == c);
}

TEST_CASE("unknown keys are rejected by name") {
  const std::string bad = R"({"sampling": {"bogus_knob": 3}})";
  try {
    parse_config(bad, "test.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bogus_knob") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"nonsense": 1})", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"problem": {"kind": "heat"}})", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({not json)", "t"), ConfigError);
  // sequential_fp demands fokker_planck + dual_net
  CHECK_THROWS_AS(
      parse_config(R"({"mode": {"nets": "one_net", "curriculum": "sequential_fp"}})", "t"),
      ConfigError);
}

TEST_CASE("extends chains merge parent-first") {
  TempDir dir("extends");
  write_file(dir.path / "base.json", R"({
    "problem": {"kind": "laplace"},
    "sampling": {"n_interior_phase1": 500, "n_boundary_per_edge": 32},
    "seed": 7
  })");
  write_file(dir.path / "child.json", R"({
    "extends": "base.json",
    "sampling": {"n_interior_phase1": 900},
    "seed": 11
  })");
  const RunConfig c = load_config((dir.path / "child.json").string());
  CHECK(c.problem == "laplace");
  CHECK(c.n_interior_phase1 == 900);   // overridden
  CHECK(c.n_boundary_per_edge == 32);  // inherited
  CHECK(c.seed == 11);

  write_file(dir.path / "a.json", R"({"extends": "b.json"})");
  write_file(dir.path / "b.json", R"({"extends": "a.json"})");
  CHECK_THROWS_AS(load_config((dir.path / "a.json").string()), ConfigError);
  CHECK_THROWS_AS(load_config((dir.path / "missing.json").string()), ConfigError);
}

TEST_CASE("fingerprints key on content including the seed") {
  RunConfig a;
  RunConfig b;
  CHECK(config_fingerprint(a) == config_fingerprint(b));
  CHECK(config_fingerprint(a).size() == 16);
  b.seed = 43;
  CHECK(config_fingerprint(a) != config_fingerprint(b));
  b = a;
  b.lr = 2e-3;
  CHECK(config_fingerprint(a) != config_fingerprint(b));
}

TEST_CASE("metrics CSV golden format") {
  CHECK(metrics_csv_header() ==
        "run_id,problem,mode,seed,mae,rmse,rel_l2,accuracy_pct,boundary_l2,"
        "pde_residual_l2,epochs_run,wall_clock_s\n");
  MetricsRecord m;
  m.mae = 0.0129;
  m.rmse = 0.0141;
  m.rel_l2 = 0.0485;
  m.accuracy_pct = 95.15;
  m.boundary_l2 = 0.0119;
  m.pde_residual_l2 = 0.049;
  m.seed = 42;
  m.epochs_run = 2000;
  m.wall_clock_s = 123.456;  // suppressed unless DUALPINN_TIMING=1
  const std::string row = metrics_csv_row("abc123", "fokker_planck", "one_net_one_phase", m);
  CHECK(row ==
        "abc123,fokker_planck,one_net_one_phase,42,0.0129,0.0141,0.0485,95.15,"
        "0.0119,0.049,2000,0\n");
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 95.15, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("cmd_run writes the artifact set and is byte-stable") {
  TempDir dir("cmd_run");
  const fs::path cfg_path = dir.path / "poisson.json";
  write_file(cfg_path, tiny_poisson_json((dir.path / "out_a").string(), 10));

  CliOptions opt;
  opt.config_path = cfg_path.string();
  CHECK(cmd_run(opt) == 0);

  const RunConfig cfg = load_config(cfg_path.string());
  const fs::path run_dir = dir.path / "out_a" / config_fingerprint(cfg);
  CHECK(fs::exists(run_dir / "metrics.csv"));
  CHECK(fs::exists(run_dir / "trace.csv"));
  CHECK(fs::exists(run_dir / "slice_y0.8.csv"));
  CHECK(fs::exists(run_dir / "checkpoint.json"));
  CHECK(fs::exists(run_dir / "run.log"));

  // Same config + seed into a second directory: metrics bytes identical up to
  // the run id (which fingerprints the config, out_dir included).
  CliOptions opt2 = opt;
  opt2.out_dir = (dir.path / "out_b").string();
  CHECK(cmd_run(opt2) == 0);
  RunConfig cfg2 = cfg;
  cfg2.out_dir = (dir.path / "out_b").string();
  const fs::path run_dir2 = fs::path(cfg2.out_dir) / config_fingerprint(cfg2);
  auto strip_first_col = [](const std::string& text) {
    std::stringstream in(text);
    std::string line, out_text;
    while (std::getline(in, line)) out_text += line.substr(line.find(',')) + "\n";
    return out_text;
  };
  CHECK(strip_first_col(read_file(run_dir / "metrics.csv")) ==
        strip_first_col(read_file(run_dir2 / "metrics.csv")));

  // trace.csv row count = epochs + header.
  std::stringstream trace(read_file(run_dir / "trace.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(trace, line)) ++lines;
  CHECK(lines == 11);
}

TEST_CASE("exit codes: 2 for config problems, report needs data") {
  CliOptions opt;
  opt.config_path = "definitely_missing.json";
  const char* argv_bad[] = {"dualpinn", "run", "--config", "definitely_missing.json"};
  CHECK(cli_main(4, argv_bad) == 2);

  TempDir dir("exit_codes");
  write_file(dir.path / "bad.json", R"({"schedules": {"who_is_this": 1}})");
  const std::string bad_path = (dir.path / "bad.json").string();
  const char* argv_badkey[] = {"dualpinn", "run", "--config", bad_path.c_str()};
  CHECK(cli_main(4, argv_badkey) == 2);

  fs::create_directories(dir.path / "empty");
  const std::string empty = (dir.path / "empty").string();
  const char* argv_rep[] = {"dualpinn", "report", empty.c_str()};
  CHECK(cli_main(3, argv_rep) == 2);

  // Empty --seeds list is a usage error.
  write_file(dir.path / "ok.json", tiny_poisson_json((dir.path / "out").string(), 5));
  const std::string ok_path = (dir.path / "ok.json").string();
  const char* argv_sweep[] = {"dualpinn", "sweep", "--config", ok_path.c_str(), "--seeds", ","};
  CHECK(cli_main(6, argv_sweep) == 2);
}

TEST_CASE("sweep command writes per-seed rows plus aggregates; report reads them") {
  TempDir dir("sweep_cmd");
  const fs::path cfg_path = dir.path / "cfg.json";
  const std::string out = (dir.path / "out").string();
  write_file(cfg_path, tiny_poisson_json(out, 8));

  CliOptions opt;
  opt.config_path = cfg_path.string();
  opt.seeds = {40, 42};
  opt.jobs = 2;
  CHECK(cmd_sweep(opt) == 0);

  const std::string csv = read_file(fs::path(out) / "sweep_metrics.csv");
  std::stringstream ss(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(ss, line)) lines.push_back(line);
  REQUIRE(lines.size() == 5);  // header + 2 seeds + mean + std
  CHECK(lines[1].find(",40,") != std::string::npos);
  CHECK(lines[2].find(",42,") != std::string::npos);
  CHECK(lines[3].rfind("mean,", 0) == 0);
  CHECK(lines[4].rfind("std,", 0) == 0);

  CHECK(cmd_report(out) == 0);
}

TEST_CASE("sweep --jobs 1 and --jobs 4 produce byte-identical CSVs") {
  TempDir dir("sweep_jobs");
  const std::string out1 = (dir.path / "j1").string();
  const std::string out4 = (dir.path / "j4").string();
  write_file(dir.path / "c1.json", tiny_poisson_json(out1, 8));
  write_file(dir.path / "c4.json", tiny_poisson_json(out4, 8));

  CliOptions o1;
  o1.config_path = (dir.path / "c1.json").string();
  o1.seeds = {40, 42, 44};
  o1.jobs = 1;
  CHECK(cmd_sweep(o1) == 0);

  CliOptions o4;
  o4.config_path = (dir.path / "c4.json").string();
  o4.seeds = {40, 42, 44};
  o4.jobs = 4;
  CHECK(cmd_sweep(o4) == 0);

  std::string a = read_file(fs::path(out1) / "sweep_metrics.csv");
  std::string b = read_file(fs::path(out4) / "sweep_metrics.csv");
  // The run ids differ only through out_dir (part of the fingerprinted
  // config); strip the first column before comparing.
  auto strip_runid = [](const std::string& text) {
    std::stringstream in(text);
    std::string line, out_text;
    while (std::getline(in, line)) out_text += line.substr(line.find(',')) + "\n";
    return out_text;
  };
  CHECK(strip_runid(a) == strip_runid(b));
}
