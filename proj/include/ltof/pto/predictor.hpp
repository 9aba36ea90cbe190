#pragma once

#include "ltof/core/standardizer.hpp"
#include "ltof/core/types.hpp"
#include "ltof/data/dataset.hpp"
#include "ltof/lto/common.hpp"
#include "ltof/nn/mlp.hpp"
#include "ltof/problems/pgd.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ltof::pto {

enum class Baseline { two_stage, epo, frozen_proxy, frozen_proxy_pretrained };

std::string to_string(Baseline baseline);
Baseline baseline_from_string(const std::string& name);

struct PtoConfig {
  std::size_t m = 1;  // hidden layers of the predictor
  std::size_t hidden_width = 64;
  std::vector<double> lr_grid{1e-3};
  std::size_t epochs = 200;
  std::size_t batch_size = 200;
  std::size_t patience = 20;
  std::uint64_t seed = 0;
  problems::PgdSettings pgd;  // nonconvex training solves and their validation
};

/// Predictor C: z -> zeta_hat, with the feature standardizer fitted on train.
struct PredictorModel {
  Baseline kind = Baseline::two_stage;
  std::size_t m = 1;
  nn::Mlp net;
  Standardizer scaler;
  double lr = 0.0;
  std::size_t best_epoch = 0;
  double best_val_score = 0.0;
  std::vector<lto::EpochRecord> history;
  std::size_t skipped = 0;  // training elements dropped for solver or KKT failures
};

/// zeta_hat rows for raw feature rows.
Matrix predict_params(const PredictorModel& model, const Matrix& raw_features);

/// Predictor network over the standardized features, seeded from (seed, stream).
nn::Mlp init_predictor(std::size_t input_dim, std::size_t output_dim, const PtoConfig& config,
                       std::uint64_t stream);

/// Trains once per learning rate, keeps the best validation score and skips
/// learning rates that diverge. Throws TrainingDivergence when all diverge.
PredictorModel best_predictor_over_lr(const std::vector<double>& lr_grid,
                                      const std::function<PredictorModel(double lr)>& train_one);

/// Per-sample decisions of a solver-based pipeline with phase timings.
struct PipelineDecisions {
  Matrix decisions;
  std::vector<double> predict_seconds;
  std::vector<double> solve_seconds;
  std::size_t solve_failures = 0;
};

/// Predicts zeta_hat for each row of `rows` and solves the downstream problem
/// with ground_truth(zeta_hat). A failed solve is counted and its decision is
/// left at zero for restoration to repair.
PipelineDecisions solve_pipeline(const PredictorModel& model, const data::Dataset& dataset,
                                 const IndexList& rows);

/// Regret, violation and timings of a predictor on one split. `it` is the
/// predictor forward time and the solve time is reported separately.
lto::EvalSummary evaluate_predictor(const PredictorModel& model, const data::Dataset& dataset,
                                    data::Split split);

}  // namespace ltof::pto
