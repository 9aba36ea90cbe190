#pragma once

#include "ltof/pto/predictor.hpp"

#include <optional>

namespace ltof::pto {

/// Mean over the batch of |zeta_hat - zeta|^2; writes the output gradient.
double mse_loss(const Matrix& zeta_hat, const Matrix& zeta, Matrix* d_zeta_hat);

/// MSE regression of zeta from z with early stopping on validation MSE.
/// `init` replaces the seeded initial network when given.
PredictorModel two_stage_train_lr(const data::Dataset& dataset, const PtoConfig& config, double lr,
                                  const std::optional<nn::Mlp>& init = std::nullopt);
PredictorModel two_stage_train(const data::Dataset& dataset, const PtoConfig& config);

}  // namespace ltof::pto
