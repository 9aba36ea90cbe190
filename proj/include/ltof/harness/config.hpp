#pragma once

#include "ltof/data/nonconvex_data.hpp"
#include "ltof/lto/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ltof::harness {

/// Method labels accepted in configs: the learned-proxy methods (LD, PDL,
/// DC3) and the predict-then-optimize baselines (TwoStage, EPO, EPO-Proxy,
/// EPO-Proxy-Pretrained).
const std::vector<std::string>& known_methods();
bool is_lto_method(const std::string& method);

struct ExperimentConfig {
  std::string problem = "portfolio";  // portfolio | nonconvex_qp
  std::vector<std::size_t> ks{2, 4, 8};
  std::vector<std::string> methods{"LD", "PDL", "DC3", "TwoStage", "EPO"};
  std::vector<std::size_t> ms{1, 2, 4, 8};  // predictor depths of the baselines
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  bool lto_reference = true;  // also report k = 0 (LtO) rows for the proxy methods

  std::size_t n_samples = 2400;
  std::size_t assets = 10;
  data::NonconvexDims nonconvex;
  std::size_t restarts = 16;
  std::size_t feature_dim = 0;  // 0: 30 for the portfolio, 50 for the nonconvex QP
  std::uint64_t data_seed = 1;

  std::vector<double> lr_grid{1e-3};
  std::size_t epochs = 200;
  std::size_t baseline_epochs = 200;
  std::size_t epo_epochs = 200;  // EPO through the solver, usually the costliest
  std::size_t batch_size = 200;
  std::size_t patience = 20;
  std::size_t hidden_width = 64;
  std::string proxy_method = "LD";  // frozen proxy for the EPO-Proxy rows
  lto::LdConfig ld;
  lto::PdlConfig pdl;
  lto::Dc3Config dc3;

  std::size_t threads = 1;
  std::string output_dir = "out";

  /// Throws ContractViolation naming the offending field.
  void validate() const;
  std::size_t resolved_feature_dim() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing fields keep their defaults; unknown fields are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Throws ParseError naming the path when the file is missing or malformed.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace ltof::harness
