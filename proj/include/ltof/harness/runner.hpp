#pragma once

#include "ltof/data/dataset.hpp"
#include "ltof/harness/config.hpp"
#include "ltof/lto/common.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ltof::harness {

/// Metrics of one (method, k, m) configuration for one seed on the test split.
struct SeedResult {
  std::string method;
  std::size_t k = 0;
  std::size_t m = 0;  // 0 for the proxy methods
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string dataset_hash;  // hash of the cell's dataset (features included)
  lto::EvalSummary summary;
  double it = 0.0;   // per-sample forward time
  double solve = 0.0;  // per-sample downstream solve time (solver pipelines)
  double fct = 0.0;  // per-sample restoration time
  double et = 0.0;   // it + solve + fct
};

/// One report line: a configuration averaged over its successful seeds.
struct ReportRow {
  std::string problem;
  std::string method;
  std::size_t k = 0;
  std::size_t m = 0;     // 0 when not applicable
  bool best_of_m = false;  // row selects the m with the lowest restored regret
  std::string status;    // ok | partial | failed
  std::size_t seeds = 0;   // contributing seeds
  std::size_t failed = 0;
  double percent_pre = 0.0;  // NaN when the optimum is zero
  double percent_post = 0.0;
  double regret_pre = 0.0;
  double regret_post = 0.0;
  double min_regret_post = 0.0;  // lowest single-sample restored regret over all seeds
  double violation_pre = 0.0;
  double violation_post = 0.0;  // worst restored violation over all seeds
  double it = 0.0;
  double solve = 0.0;
  double fct = 0.0;
  double et = 0.0;
  std::string error;  // first error message when a seed failed

  /// Restored percent regret, or restored absolute regret when the percent
  /// form is undefined. Infinite for failed rows.
  double score() const;
};

/// Problem instance, parameters and targets shared by every cell of a grid.
data::Dataset make_base_dataset(const ExperimentConfig& config);

/// Features of complexity k for one seed over the shared base dataset.
data::Dataset cell_dataset(const data::Dataset& base, const ExperimentConfig& config,
                           std::size_t k, std::uint64_t seed);

/// Parameter-input proxy used by the frozen-proxy baselines for `seed`.
lto::TrainedModel train_proxy(const data::Dataset& base, const ExperimentConfig& config,
                              std::uint64_t seed);

/// Trains and evaluates one configuration. Training or solver failures yield
/// a result with ok = false; contract violations propagate. `proxy` is
/// required for the frozen-proxy methods and `pretrained` (an MSE-trained
/// predictor of the same m) is reused by the pretrained variant when given.
/// `predictor_out`, when non-null, receives a baseline's trained predictor.
struct CellInputs {
  const data::Dataset* dataset = nullptr;
  const lto::TrainedModel* proxy = nullptr;
  const nn::Mlp* pretrained = nullptr;
  nn::Mlp* predictor_out = nullptr;
};
SeedResult run_cell(const ExperimentConfig& config, const std::string& method, std::size_t k,
                    std::size_t m, std::uint64_t seed, const CellInputs& inputs);

/// Averages seed results of one configuration into a row.
ReportRow aggregate(const std::string& problem, const std::vector<SeedResult>& results);

/// Per-m rows of each baseline followed by its best-of-m row, per k.
/// The best row copies the per-m row with the lowest score.
std::vector<ReportRow> with_best_rows(const std::vector<ReportRow>& rows);

struct GridResult {
  ExperimentConfig config;
  std::string base_hash;
  std::vector<SeedResult> seed_results;
  std::vector<ReportRow> rows;
  double seconds = 0.0;
};

/// Full (method x k x m) sweep over the configured seeds. Cells for one seed
/// and k share a dataset; seeds run on up to config.threads workers.
GridResult reproduce_grid(const ExperimentConfig& config);

}  // namespace ltof::harness
