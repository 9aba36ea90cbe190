#pragma once

#include "ltof/lto/common.hpp"

#include <limits>

namespace ltof::lto {

struct PdlState {
  double rho = 0.5;
  double rho_max = 5000.0;
  double tau = 0.8;
  double alpha = 5.0;
  double previous_violation = std::numeric_limits<double>::infinity();
};

PdlState pdl_initial_state(const PdlConfig& config);

/// sum_j max(0, g_j)^2 + sum_j h_j^2.
double pdl_penalty(const Vector& g, const Vector& h);

/// f + lambda'g + mu'h + rho/2 * pdl_penalty(g, h) with lambda already clamped
/// at zero; writes d/dx_hat when `grad` is non-null.
double pdl_sample_loss(const problems::ParametricProblem& problem, const Vector& x_hat,
                       const Vector& zeta, const Vector& lambda, const Vector& mu, double rho,
                       Vector* grad = nullptr);

/// Regression targets for the dual network: lambda + rho [g]_+ and mu + rho h.
void pdl_dual_targets(const Vector& lambda, const Vector& mu, const Vector& g, const Vector& h,
                      double rho, Vector& lambda_target, Vector& mu_target);

/// rho <- min(alpha rho, rho_max) when `max_violation` exceeds tau times the
/// previous outer iteration's value; records the new value either way.
void pdl_update_rho(PdlState& state, double max_violation);

/// Self-supervised training; never reads x_star of the train split.
TrainedModel pdl_train(const data::Dataset& dataset, const TrainConfig& config);
TrainedModel pdl_train_lr(const data::Dataset& dataset, const TrainConfig& config, double lr);

}  // namespace ltof::lto
