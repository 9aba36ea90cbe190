#include "ltof/harness/config.hpp"

#include "ltof/core/error.hpp"
#include "ltof/pto/predictor.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace ltof::harness {

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> methods{"LD",  "PDL",       "DC3",
                                                "TwoStage", "EPO", "EPO-Proxy",
                                                "EPO-Proxy-Pretrained"};
  return methods;
}

bool is_lto_method(const std::string& method) {
  return method == "LD" || method == "PDL" || method == "DC3";
}

std::size_t ExperimentConfig::resolved_feature_dim() const {
  if (feature_dim > 0) return feature_dim;
  return problem == "portfolio" ? 30 : 50;
}

void ExperimentConfig::validate() const {
  LTOF_REQUIRE(problem == "portfolio" || problem == "nonconvex_qp",
               "problem: unknown '" + problem + "' (valid: portfolio, nonconvex_qp)");
  LTOF_REQUIRE(!ks.empty(), "ks: at least one feature complexity is required");
  LTOF_REQUIRE(!methods.empty(), "methods: at least one method is required");
  for (const std::string& m : methods) {
    const auto& known = known_methods();
    LTOF_REQUIRE(std::find(known.begin(), known.end(), m) != known.end(),
                 "methods: unknown '" + m +
                     "' (valid: LD, PDL, DC3, TwoStage, EPO, EPO-Proxy, EPO-Proxy-Pretrained)");
  }
  LTOF_REQUIRE(std::set<std::string>(methods.begin(), methods.end()).size() == methods.size(),
               "methods: duplicates");
  LTOF_REQUIRE(is_lto_method(proxy_method), "proxy_method: must be LD, PDL or DC3");
  LTOF_REQUIRE(!seeds.empty(), "seeds: at least one seed is required");
  LTOF_REQUIRE(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == seeds.size(),
               "seeds: duplicates");
  for (std::size_t m : ms) LTOF_REQUIRE(m >= 1, "ms: predictor depth must be at least 1");
  const bool baselines = std::any_of(methods.begin(), methods.end(),
                                     [](const std::string& m) { return !is_lto_method(m); });
  LTOF_REQUIRE(!baselines || !ms.empty(), "ms: baselines need at least one predictor depth");
  LTOF_REQUIRE(n_samples >= 24, "n_samples: at least 24 samples are required");
  LTOF_REQUIRE(!lr_grid.empty(), "lr_grid: at least one learning rate is required");
  for (double lr : lr_grid) LTOF_REQUIRE(lr > 0.0, "lr_grid: learning rates must be positive");
  LTOF_REQUIRE(epochs >= 1 && baseline_epochs >= 1 && epo_epochs >= 1, "epochs must be positive");
  LTOF_REQUIRE(batch_size >= 1 && hidden_width >= 1, "batch_size and hidden_width must be positive");
  LTOF_REQUIRE(threads >= 1, "threads: at least one worker");
  LTOF_REQUIRE(restarts >= 1, "restarts: at least one PGD start");
}

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* name, T& out) {
  if (!j.contains(name)) return;
  try {
    out = j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config.") + name + ": " + e.what());
  }
}

const std::set<std::string> kFields{
    "problem", "ks",           "methods",         "ms",         "seeds",        "lto_reference",
    "n_samples", "assets",     "nonconvex",       "restarts",   "feature_dim",  "data_seed",
    "lr_grid", "epochs",       "baseline_epochs", "epo_epochs", "batch_size",   "patience",
    "hidden_width", "proxy_method", "ld",          "pdl",        "dc3",          "threads",
    "output_dir"};

}  // namespace

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"problem", c.problem},
          {"ks", c.ks},
          {"methods", c.methods},
          {"ms", c.ms},
          {"seeds", c.seeds},
          {"lto_reference", c.lto_reference},
          {"n_samples", c.n_samples},
          {"assets", c.assets},
          {"nonconvex", {{"n", c.nonconvex.n}, {"n_eq", c.nonconvex.n_eq}, {"n_ineq", c.nonconvex.n_ineq}}},
          {"restarts", c.restarts},
          {"feature_dim", c.feature_dim},
          {"data_seed", c.data_seed},
          {"lr_grid", c.lr_grid},
          {"epochs", c.epochs},
          {"baseline_epochs", c.baseline_epochs},
          {"epo_epochs", c.epo_epochs},
          {"batch_size", c.batch_size},
          {"patience", c.patience},
          {"hidden_width", c.hidden_width},
          {"proxy_method", c.proxy_method},
          {"ld", {{"lambda0", c.ld.lambda0}, {"mu0", c.ld.mu0}, {"step", c.ld.step}}},
          {"pdl", {{"rho", c.pdl.rho}, {"rho_max", c.pdl.rho_max}, {"tau", c.pdl.tau},
                   {"alpha", c.pdl.alpha}, {"epochs_per_outer", c.pdl.epochs_per_outer},
                   {"dual_epochs", c.pdl.dual_epochs}}},
          {"dc3", {{"lambda", c.dc3.lambda}, {"mu", c.dc3.mu}, {"t_train", c.dc3.t_train},
                   {"t_test", c.dc3.t_test}, {"step_scale", c.dc3.step_scale}}},
          {"threads", c.threads},
          {"output_dir", c.output_dir}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("config: expected a JSON object");
  for (const auto& item : j.items()) {
    if (!kFields.count(item.key())) throw ParseError("config: unknown field '" + item.key() + "'");
  }
  ExperimentConfig c;
  read(j, "problem", c.problem);
  read(j, "ks", c.ks);
  read(j, "methods", c.methods);
  read(j, "ms", c.ms);
  read(j, "seeds", c.seeds);
  read(j, "lto_reference", c.lto_reference);
  read(j, "n_samples", c.n_samples);
  read(j, "assets", c.assets);
  if (j.contains("nonconvex")) {
    const auto& d = j.at("nonconvex");
    read(d, "n", c.nonconvex.n);
    read(d, "n_eq", c.nonconvex.n_eq);
    read(d, "n_ineq", c.nonconvex.n_ineq);
  }
  read(j, "restarts", c.restarts);
  read(j, "feature_dim", c.feature_dim);
  read(j, "data_seed", c.data_seed);
  read(j, "lr_grid", c.lr_grid);
  read(j, "epochs", c.epochs);
  read(j, "baseline_epochs", c.baseline_epochs);
  read(j, "epo_epochs", c.epo_epochs);
  read(j, "batch_size", c.batch_size);
  read(j, "patience", c.patience);
  read(j, "hidden_width", c.hidden_width);
  read(j, "proxy_method", c.proxy_method);
  if (j.contains("ld")) {
    const auto& d = j.at("ld");
    read(d, "lambda0", c.ld.lambda0);
    read(d, "mu0", c.ld.mu0);
    read(d, "step", c.ld.step);
  }
  if (j.contains("pdl")) {
    const auto& d = j.at("pdl");
    read(d, "rho", c.pdl.rho);
    read(d, "rho_max", c.pdl.rho_max);
    read(d, "tau", c.pdl.tau);
    read(d, "alpha", c.pdl.alpha);
    read(d, "epochs_per_outer", c.pdl.epochs_per_outer);
    read(d, "dual_epochs", c.pdl.dual_epochs);
  }
  if (j.contains("dc3")) {
    const auto& d = j.at("dc3");
    read(d, "lambda", c.dc3.lambda);
    read(d, "mu", c.dc3.mu);
    read(d, "t_train", c.dc3.t_train);
    read(d, "t_test", c.dc3.t_test);
    read(d, "step_scale", c.dc3.step_scale);
  }
  read(j, "threads", c.threads);
  read(j, "output_dir", c.output_dir);
  try {
    c.validate();
  } catch (const ContractViolation& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config file not found: '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace ltof::harness
