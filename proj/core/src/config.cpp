#include "dualpinn/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dualpinn/errors.hpp"

namespace dualpinn {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Recursive merge: child object keys override parent, objects merge deeply.
void merge_into(json& base, const json& overlay) {
  if (!base.is_object() || !overlay.is_object()) {
    base = overlay;
    return;
  }
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    if (base.contains(it.key()))
      merge_into(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
}

// Tracks key consumption so unknown keys can be rejected by name.
class Section {
 public:
  Section(const json& j, std::string path, const std::string& source)
      : j_(j), path_(std::move(path)), source_(source) {
    if (!j_.is_object())
      throw ConfigError(source_ + ": " + (path_.empty() ? "<root>" : path_) +
                        " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    auto it = j_.find(key);
    if (it == j_.end()) return;
    seen_.insert(key);
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(source_ + ": bad value type for key '" + path_ + "/" + key + "'");
    }
  }

  bool has_object(const char* key) {
    auto it = j_.find(key);
    return it != j_.end() && it->is_object();
  }

  Section sub(const char* key) {
    seen_.insert(key);
    return Section(j_.at(key), path_ + "/" + key, source_);
  }

  void skip(const char* key) { seen_.insert(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key()))
        throw ConfigError(source_ + ": unknown config key '" + path_ + "/" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> seen_;
};

void parse_net(Section sec, NetSpec& net) {
  sec.get("hidden", net.hidden);
  sec.get("activation", net.activation);
  sec.get("omega0", net.omega0);
  sec.finish();
}

RunConfig from_json(const json& j, const std::string& source) {
  RunConfig c;
  Section root(j, "", source);
  root.skip("extends");  // resolved by load_config before parsing

  if (root.has_object("problem")) {
    Section s = root.sub("problem");
    s.get("kind", c.problem);
    s.get("fp_a", c.fp_a);
    s.get("fp_b", c.fp_b);
    s.get("fp_sigma", c.fp_sigma);
    s.get("fp_dx", c.fp_dx);
    s.get("fp_xmin", c.fp_xmin);
    s.get("fp_xmax", c.fp_xmax);
    s.get("wave_c", c.wave_c);
    s.finish();
  }
  if (root.has_object("mode")) {
    Section s = root.sub("mode");
    s.get("nets", c.nets);
    s.get("curriculum", c.curriculum);
    s.finish();
  }
  if (root.has_object("domain_net")) parse_net(root.sub("domain_net"), c.domain_net);
  if (root.has_object("boundary_net")) parse_net(root.sub("boundary_net"), c.boundary_net);
  if (root.has_object("sampling")) {
    Section s = root.sub("sampling");
    s.get("n_boundary_per_edge", c.n_boundary_per_edge);
    s.get("n_interior_phase1", c.n_interior_phase1);
    s.get("n_interior_phase2", c.n_interior_phase2);
    s.get("n_initial", c.n_initial);
    s.get("ring_delta", c.ring_delta);
    s.get("ring_fraction", c.ring_fraction);
    s.get("resample_every", c.resample_every);
    s.finish();
  }
  if (root.has_object("alm")) {
    Section s = root.sub("alm");
    s.get("rho0", c.alm_rho0);
    s.get("rho_max", c.alm_rho_max);
    s.get("eta", c.alm_eta);
    s.get("lambda_max", c.alm_lambda_max);
    s.get("update_every", c.alm_update_every);
    s.get("ramp_every", c.alm_ramp_every);
    s.get("multiplier_updates", c.alm_multiplier_updates);
    s.finish();
  }
  if (root.has_object("role_prior")) {
    Section s = root.sub("role_prior");
    s.get("enabled", c.role_priors);
    s.get("tau", c.role_tau);
    s.get("alpha_int", c.role_alpha_int);
    s.get("alpha_bd", c.role_alpha_bd);
    s.get("boundary_term", c.role_boundary_term);
    s.finish();
  }
  if (root.has_object("schedules")) {
    Section s = root.sub("schedules");
    s.get("gamma_min", c.gamma_min);
    s.get("gamma_max", c.gamma_max);
    s.get("wbc_min", c.wbc_min);
    s.get("wbc_max", c.wbc_max);
    s.get("anneal_gamma", c.anneal_gamma);
    s.get("phase1_constant", c.phase1_constant_schedules);
    s.get("ring_phase2", c.ring_phase2);
    s.finish();
  }
  if (root.has_object("modal_prior")) {
    Section s = root.sub("modal_prior");
    s.get("enabled", c.modal_enabled);
    s.get("modes", c.modal_modes);
    s.get("weight", c.modal_weight);
    s.get("quad_points", c.modal_quad_points);
    s.get("time_samples", c.modal_time_samples);
    s.finish();
  }
  if (root.has_object("fp")) {
    Section s = root.sub("fp");
    s.get("norm_weight", c.fp_norm_weight);
    s.get("pseudo_points", c.fp_pseudo_points);
    s.get("data_weight", c.fp_data_weight);
    s.get("pinning_weight", c.fp_pinning_weight);
    s.get("joint_role_weight", c.fp_joint_role_weight);
    s.finish();
  }
  if (root.has_object("optimizer")) {
    Section s = root.sub("optimizer");
    s.get("lr", c.lr);
    s.get("beta1", c.adam_beta1);
    s.get("beta2", c.adam_beta2);
    s.get("eps", c.adam_eps);
    s.finish();
  }
  if (root.has_object("training")) {
    Section s = root.sub("training");
    s.get("warmup_epochs", c.warmup_epochs);
    s.get("phase1_epochs", c.phase1_epochs);
    s.get("phase2_epochs", c.phase2_epochs);
    s.get("fp_data_epochs", c.fp_data_epochs);
    s.get("fp_residual_epochs", c.fp_residual_epochs);
    s.get("fp_joint_epochs", c.fp_joint_epochs);
    s.get("epoch_scale", c.epoch_scale);
    s.get("patience", c.patience);
    s.get("min_delta", c.min_delta);
    s.get("restore_best", c.restore_best);
    s.get("trace_validation_every", c.trace_validation_every);
    s.finish();
  }
  root.get("seed", c.seed);
  root.get("out_dir", c.out_dir);
  root.finish();

  c.validate();
  return c;
}

ordered_json net_to_json(const NetSpec& n) {
  ordered_json j;
  j["hidden"] = n.hidden;
  j["activation"] = n.activation;
  j["omega0"] = n.omega0;
  return j;
}

}  // namespace

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
  };
  require(problem == "poisson" || problem == "laplace" || problem == "fokker_planck" ||
              problem == "wave",
          "problem/kind must be one of poisson|laplace|fokker_planck|wave, got '" + problem + "'");
  require(nets == "one_net" || nets == "dual_net",
          "mode/nets must be one_net or dual_net, got '" + nets + "'");
  require(curriculum == "one_phase" || curriculum == "two_phase" || curriculum == "sequential_fp",
          "mode/curriculum must be one_phase|two_phase|sequential_fp, got '" + curriculum + "'");
  require(curriculum != "sequential_fp" || (problem == "fokker_planck" && nets == "dual_net"),
          "sequential_fp requires problem fokker_planck and dual_net mode");
  require(!modal_enabled || problem == "wave", "modal_prior only applies to the wave problem");
  for (const NetSpec* n : {&domain_net, &boundary_net}) {
    require(!n->hidden.empty(), "a network needs at least one hidden layer");
    for (int w : n->hidden) require(w > 0, "hidden widths must be positive");
    require(n->activation == "tanh" || n->activation == "sine",
            "activation must be tanh or sine, got '" + n->activation + "'");
    require(n->activation != "sine" || n->omega0 > 0.0, "sine activation needs omega0 > 0");
  }
  require(fp_xmin < fp_xmax, "fp_xmin must be < fp_xmax");
  require(fp_sigma > 0.0 && fp_dx > 0.0, "fp_sigma and fp_dx must be positive");
  require(wave_c > 0.0, "wave_c must be positive");
  require(n_boundary_per_edge >= 1, "n_boundary_per_edge must be >= 1");
  require(n_interior_phase1 >= 1 && n_interior_phase2 >= 1, "interior point counts must be >= 1");
  require(n_initial >= 1, "n_initial must be >= 1");
  require(ring_fraction >= 0.0 && ring_fraction <= 1.0, "ring_fraction must be in [0, 1]");
  require(resample_every >= 0, "resample_every must be >= 0");
  require(alm_rho0 > 0.0 && alm_rho_max > 0.0 && alm_lambda_max > 0.0,
          "alm rho0, rho_max and lambda_max must be positive");
  require(alm_eta >= 1.0, "alm eta must be >= 1");
  require(alm_update_every >= 1 && alm_ramp_every >= 1, "alm periods must be >= 1");
  require(role_tau >= 0.0, "role tau must be >= 0 (0 = auto)");
  require(role_alpha_int >= 0.0 && role_alpha_bd >= 0.0, "role alphas must be >= 0");
  require(gamma_min <= gamma_max && gamma_min >= 0.0, "need 0 <= gamma_min <= gamma_max");
  require(wbc_min <= wbc_max && wbc_min >= 0.0, "need 0 <= wbc_min <= wbc_max");
  require(modal_quad_points >= 16, "modal quad_points must be >= 16");
  require(modal_time_samples >= 1, "modal time_samples must be >= 1");
  for (int m : modal_modes) require(m >= 1, "modal mode indices must be >= 1");
  require(fp_pseudo_points >= 1, "fp pseudo_points must be >= 1");
  require(lr > 0.0, "learning rate must be positive");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0,
          "adam betas must be in [0, 1)");
  require(warmup_epochs >= 0 && phase1_epochs >= 0 && phase2_epochs >= 0 &&
              fp_data_epochs >= 0 && fp_residual_epochs >= 0 && fp_joint_epochs >= 0,
          "epoch counts must be >= 0");
  require(epoch_scale > 0.0, "epoch_scale must be positive");
  require(patience >= 1, "patience must be >= 1");
  require(min_delta >= 0.0, "min_delta must be >= 0");
  require(trace_validation_every >= 0, "trace_validation_every must be >= 0");
}

RunConfig parse_config(const std::string& json_text, const std::string& source_name) {
  json j;
  try {
    j = json::parse(json_text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  return from_json(j, source_name);
}

RunConfig load_config(const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<std::string> chain;
  json merged;

  // Walk the extends chain root-first so children override parents.
  std::vector<std::pair<std::string, json>> docs;
  std::string current = path;
  for (;;) {
    for (const auto& seen : chain)
      if (fs::weakly_canonical(seen) == fs::weakly_canonical(current))
        throw ConfigError("config extends cycle at " + current);
    chain.push_back(current);
    json doc = read_json_file(current);
    std::string parent;
    if (doc.is_object() && doc.contains("extends")) {
      if (!doc["extends"].is_string())
        throw ConfigError(current + ": 'extends' must be a path string");
      parent = doc["extends"].get<std::string>();
    }
    docs.emplace_back(current, std::move(doc));
    if (parent.empty()) break;
    fs::path base = fs::path(current).parent_path();
    current = (base / parent).string();
  }
  merged = json::object();
  for (auto it = docs.rbegin(); it != docs.rend(); ++it) {
    it->second.erase("extends");
    merge_into(merged, it->second);
  }
  return from_json(merged, path);
}

std::string serialize_config(const RunConfig& c) {
  ordered_json j;
  j["problem"] = {{"kind", c.problem},    {"fp_a", c.fp_a},       {"fp_b", c.fp_b},
                  {"fp_sigma", c.fp_sigma}, {"fp_dx", c.fp_dx},   {"fp_xmin", c.fp_xmin},
                  {"fp_xmax", c.fp_xmax},  {"wave_c", c.wave_c}};
  j["mode"] = {{"nets", c.nets}, {"curriculum", c.curriculum}};
  j["domain_net"] = net_to_json(c.domain_net);
  j["boundary_net"] = net_to_json(c.boundary_net);
  j["sampling"] = {{"n_boundary_per_edge", c.n_boundary_per_edge},
                   {"n_interior_phase1", c.n_interior_phase1},
                   {"n_interior_phase2", c.n_interior_phase2},
                   {"n_initial", c.n_initial},
                   {"ring_delta", c.ring_delta},
                   {"ring_fraction", c.ring_fraction},
                   {"resample_every", c.resample_every}};
  j["alm"] = {{"rho0", c.alm_rho0},
              {"rho_max", c.alm_rho_max},
              {"eta", c.alm_eta},
              {"lambda_max", c.alm_lambda_max},
              {"update_every", c.alm_update_every},
              {"ramp_every", c.alm_ramp_every},
              {"multiplier_updates", c.alm_multiplier_updates}};
  j["role_prior"] = {{"enabled", c.role_priors},
                     {"tau", c.role_tau},
                     {"alpha_int", c.role_alpha_int},
                     {"alpha_bd", c.role_alpha_bd},
                     {"boundary_term", c.role_boundary_term}};
  j["schedules"] = {{"gamma_min", c.gamma_min},
                    {"gamma_max", c.gamma_max},
                    {"wbc_min", c.wbc_min},
                    {"wbc_max", c.wbc_max},
                    {"anneal_gamma", c.anneal_gamma},
                    {"phase1_constant", c.phase1_constant_schedules},
                    {"ring_phase2", c.ring_phase2}};
  j["modal_prior"] = {{"enabled", c.modal_enabled},
                      {"modes", c.modal_modes},
                      {"weight", c.modal_weight},
                      {"quad_points", c.modal_quad_points},
                      {"time_samples", c.modal_time_samples}};
  j["fp"] = {{"norm_weight", c.fp_norm_weight},
             {"pseudo_points", c.fp_pseudo_points},
             {"data_weight", c.fp_data_weight},
             {"pinning_weight", c.fp_pinning_weight},
             {"joint_role_weight", c.fp_joint_role_weight}};
  j["optimizer"] = {
      {"lr", c.lr}, {"beta1", c.adam_beta1}, {"beta2", c.adam_beta2}, {"eps", c.adam_eps}};
  j["training"] = {{"warmup_epochs", c.warmup_epochs},
                   {"phase1_epochs", c.phase1_epochs},
                   {"phase2_epochs", c.phase2_epochs},
                   {"fp_data_epochs", c.fp_data_epochs},
                   {"fp_residual_epochs", c.fp_residual_epochs},
                   {"fp_joint_epochs", c.fp_joint_epochs},
                   {"epoch_scale", c.epoch_scale},
                   {"patience", c.patience},
                   {"min_delta", c.min_delta},
                   {"restore_best", c.restore_best},
                   {"trace_validation_every", c.trace_validation_every}};
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  return j.dump(2) + "\n";
}

std::string config_fingerprint(const RunConfig& config) {
  const std::string text = serialize_config(config);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace dualpinn
