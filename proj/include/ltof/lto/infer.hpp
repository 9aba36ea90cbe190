#pragma once

#include "ltof/lto/common.hpp"

namespace ltof::lto {

/// Dispatches to ld_train, pdl_train or dc3_train.
TrainedModel lto_train(const data::Dataset& dataset, const TrainConfig& config);

/// Pre-restoration decisions for raw (unstandardized) input rows. DC3 models
/// apply completion and t_test correction steps. Dropout is never applied.
Matrix lto_predict(const TrainedModel& model, const Matrix& raw_inputs);
Vector lto_infer(const TrainedModel& model, const Vector& raw_input);

struct TimedPredictions {
  Matrix decisions;
  std::vector<double> seconds;  // per-sample wall-clock inference time
};

/// Runs lto_infer one sample at a time and records each call's duration.
TimedPredictions lto_predict_timed(const TrainedModel& model, const Matrix& raw_inputs);

/// Per-sample inference, restoration and regret on one split.
EvalSummary evaluate_model(const TrainedModel& model, const data::Dataset& dataset,
                           data::Split split);

}  // namespace ltof::lto
