#include "ltof/lto/ld.hpp"

#include "ltof/core/error.hpp"

namespace ltof::lto {

LdState ld_initial_state(const problems::ParametricProblem& problem, const LdConfig& config) {
  LTOF_REQUIRE(config.lambda0 >= 0.0, "initial inequality multiplier must be nonnegative");
  LdState s;
  s.lambda = Vector::Constant(static_cast<Eigen::Index>(problem.m_ineq()), config.lambda0);
  s.mu = Vector::Constant(static_cast<Eigen::Index>(problem.m_eq()), config.mu0);
  s.step = config.step;
  return s;
}

void ld_dual_update(LdState& state, const Vector& mean_violation, const Vector& mean_eq_residual) {
  LTOF_REQUIRE(mean_violation.size() == state.lambda.size() &&
                   mean_eq_residual.size() == state.mu.size(),
               "multiplier length mismatch");
  state.lambda = (state.lambda + state.step * mean_violation).cwiseMax(0.0);
  state.mu += state.step * mean_eq_residual;
}

double ld_sample_loss(const problems::ParametricProblem& problem, const LdState& state,
                      const Vector& x_hat, const Vector& zeta, const Vector& x_star, Vector* grad) {
  const Vector diff = x_hat - x_star;
  double loss = diff.squaredNorm();
  if (grad) *grad = 2.0 * diff;
  if (problem.m_ineq() > 0) {
    const Vector g = problem.ineq_residuals(x_hat, zeta);
    const Vector active = (g.array() > 0.0).cast<double>().matrix();
    loss += state.lambda.dot(g.cwiseMax(0.0));
    if (grad) *grad += problem.ineq_jacobian(x_hat, zeta).transpose() * state.lambda.cwiseProduct(active);
  }
  if (problem.m_eq() > 0) {
    loss += state.mu.dot(problem.eq_residuals(x_hat, zeta));
    if (grad) *grad += problem.eq_jacobian(x_hat, zeta).transpose() * state.mu;
  }
  return loss;
}

TrainedModel ld_train_lr(const data::Dataset& ds, const TrainConfig& config, double lr) {
  LTOF_REQUIRE(ds.has_targets(), "LD training needs precomputed targets");
  const auto& problem = *ds.problem;
  PreparedInputs prepared = prepare_inputs(ds, config.mode);
  LdState state = ld_initial_state(problem, config.ld);
  Vector violation_sum = Vector::Zero(state.lambda.size());
  Vector eq_sum = Vector::Zero(state.mu.size());
  std::size_t count = 0;

  LoopSpec spec;
  spec.dataset = &ds;
  spec.inputs = &prepared.inputs;
  spec.net = init_network(static_cast<std::size_t>(prepared.inputs.cols()), problem.n_decision(),
                          config, ds.k, 1);
  spec.lr = lr;
  spec.epochs = config.epochs;
  spec.batch_size = config.batch_size;
  spec.patience = config.patience;
  spec.dropout = config.dropout;
  spec.seed = config.seed;
  spec.loss = [&](const IndexList& rows, const Matrix& Y, Matrix& dY) {
    const double scale = 1.0 / static_cast<double>(rows.size());
    double total = 0.0;
    Vector grad;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(rows[i]);
      const Vector x_hat = Y.row(static_cast<Eigen::Index>(i)).transpose();
      const Vector zeta = ds.zeta.row(r).transpose();
      total += ld_sample_loss(problem, state, x_hat, zeta, ds.x_star.row(r).transpose(), &grad);
      dY.row(static_cast<Eigen::Index>(i)) = scale * grad.transpose();
      if (problem.m_ineq() > 0) violation_sum += problem.ineq_residuals(x_hat, zeta).cwiseMax(0.0);
      if (problem.m_eq() > 0) eq_sum += problem.eq_residuals(x_hat, zeta);
      ++count;
    }
    return total * scale;
  };
  spec.end_epoch = [&](std::size_t, const nn::Mlp&) {
    const double inv = 1.0 / static_cast<double>(count);
    ld_dual_update(state, violation_sum * inv, eq_sum * inv);
    violation_sum.setZero();
    eq_sum.setZero();
    count = 0;
  };

  LoopResult loop = run_training(std::move(spec));
  TrainedModel model;
  model.method = Method::ld;
  model.mode = config.mode;
  model.k = ds.k;
  model.net = std::move(loop.best_net);
  model.scaler = std::move(prepared.scaler);
  model.ld_lambda = state.lambda;
  model.ld_mu = state.mu;
  model.lr = lr;
  model.best_epoch = loop.best_epoch;
  model.best_val_score = loop.best_score;
  model.history = std::move(loop.history);
  return model;
}

TrainedModel ld_train(const data::Dataset& dataset, const TrainConfig& config) {
  return best_over_lr_grid(config.lr_grid,
                           [&](double lr) { return ld_train_lr(dataset, config, lr); });
}

}  // namespace ltof::lto
