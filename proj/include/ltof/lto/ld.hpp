#pragma once

#include "ltof/lto/common.hpp"

namespace ltof::lto {

/// Multipliers of the Lagrangian dual loss.
struct LdState {
  Vector lambda;  // >= 0, one per inequality
  Vector mu;      // one per equality
  double step = 1e-3;
};

LdState ld_initial_state(const problems::ParametricProblem& problem, const LdConfig& config);

/// lambda <- max(0, lambda + s * mean_violation), mu <- mu + s * mean_eq_residual,
/// where mean_violation is the mean of [g]_+ and mean_eq_residual the signed mean of h.
void ld_dual_update(LdState& state, const Vector& mean_violation, const Vector& mean_eq_residual);

/// |x_hat - x_star|^2 + lambda'[g(x_hat)]_+ + mu'h(x_hat); writes d/dx_hat when `grad` is non-null.
double ld_sample_loss(const problems::ParametricProblem& problem, const LdState& state,
                      const Vector& x_hat, const Vector& zeta, const Vector& x_star,
                      Vector* grad = nullptr);

/// Supervised training; requires precomputed targets.
TrainedModel ld_train(const data::Dataset& dataset, const TrainConfig& config);
TrainedModel ld_train_lr(const data::Dataset& dataset, const TrainConfig& config, double lr);

}  // namespace ltof::lto
