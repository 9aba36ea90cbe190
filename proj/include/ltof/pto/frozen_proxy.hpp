#pragma once

#include "ltof/lto/common.hpp"
#include "ltof/pto/predictor.hpp"

namespace ltof::pto {

/// Decision loss f(F(zeta_hat), zeta) of a frozen parameter-input proxy F on
/// its raw (pre-restoration) output, averaged over rows, with the gradient in
/// each zeta_hat row when `d_zeta_hat` is non-null.
double frozen_proxy_loss(const lto::TrainedModel& proxy, const problems::ParametricProblem& problem,
                         const Matrix& zeta_hat, const Matrix& zeta, Matrix* d_zeta_hat);

/// Trains a predictor C so that F(C(z)) scores well under the true zeta while
/// the proxy stays fixed. A non-null `init` (an MSE-pretrained predictor)
/// replaces the seeded initial network and marks the model as pretrained.
PredictorModel frozen_proxy_train_lr(const lto::TrainedModel& proxy, const data::Dataset& dataset,
                                     const PtoConfig& config, double lr,
                                     const nn::Mlp* init = nullptr);
/// With `pretrain`, C starts from the two-stage solution.
PredictorModel frozen_proxy_train(const lto::TrainedModel& proxy, const data::Dataset& dataset,
                                  const PtoConfig& config, bool pretrain);

/// Decisions F(C(z)) before restoration, with the per-sample forward time of
/// the composed pipeline.
lto::EvalSummary evaluate_frozen_proxy(const PredictorModel& model, const lto::TrainedModel& proxy,
                                       const data::Dataset& dataset, data::Split split);

}  // namespace ltof::pto
