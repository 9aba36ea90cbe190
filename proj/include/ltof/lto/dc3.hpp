#pragma once

#include "ltof/lto/common.hpp"

namespace ltof::lto {

/// f + lambda |[g]_+|^2 + mu |h|^2; writes d/dx when `grad` is non-null.
double dc3_sample_loss(const problems::ParametricProblem& problem, const Vector& x,
                       const Vector& zeta, double lambda, double mu, Vector* grad = nullptr);

/// Self-supervised training of the partial-variable network through the
/// completion and t_train unrolled correction steps. Requires constraints
/// that are linear in x; never reads x_star of the train split.
TrainedModel dc3_train(const data::Dataset& dataset, const TrainConfig& config);
TrainedModel dc3_train_lr(const data::Dataset& dataset, const TrainConfig& config, double lr);

}  // namespace ltof::lto
