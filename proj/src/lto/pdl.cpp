#include "ltof/lto/pdl.hpp"

#include "ltof/core/error.hpp"
#include "ltof/nn/adam.hpp"

#include <algorithm>

namespace ltof::lto {

PdlState pdl_initial_state(const PdlConfig& config) {
  LTOF_REQUIRE(config.rho > 0.0 && config.rho <= config.rho_max, "need 0 < rho <= rho_max");
  LTOF_REQUIRE(config.alpha >= 1.0, "rho growth factor must be at least 1");
  PdlState s;
  s.rho = config.rho;
  s.rho_max = config.rho_max;
  s.tau = config.tau;
  s.alpha = config.alpha;
  return s;
}

double pdl_penalty(const Vector& g, const Vector& h) {
  return g.cwiseMax(0.0).squaredNorm() + h.squaredNorm();
}

double pdl_sample_loss(const problems::ParametricProblem& problem, const Vector& x_hat,
                       const Vector& zeta, const Vector& lambda, const Vector& mu, double rho,
                       Vector* grad) {
  double loss = problem.objective(x_hat, zeta);
  if (grad) *grad = problem.grad_x_objective(x_hat, zeta);
  if (problem.m_ineq() > 0) {
    const Vector g = problem.ineq_residuals(x_hat, zeta);
    const Vector gp = g.cwiseMax(0.0);
    loss += lambda.dot(g) + 0.5 * rho * gp.squaredNorm();
    if (grad) *grad += problem.ineq_jacobian(x_hat, zeta).transpose() * (lambda + rho * gp);
  }
  if (problem.m_eq() > 0) {
    const Vector h = problem.eq_residuals(x_hat, zeta);
    loss += mu.dot(h) + 0.5 * rho * h.squaredNorm();
    if (grad) *grad += problem.eq_jacobian(x_hat, zeta).transpose() * (mu + rho * h);
  }
  return loss;
}

void pdl_dual_targets(const Vector& lambda, const Vector& mu, const Vector& g, const Vector& h,
                      double rho, Vector& lambda_target, Vector& mu_target) {
  lambda_target = lambda + rho * g.cwiseMax(0.0);
  mu_target = mu + rho * h;
}

void pdl_update_rho(PdlState& state, double max_violation) {
  if (max_violation > state.tau * state.previous_violation) {
    state.rho = std::min(state.alpha * state.rho, state.rho_max);
  }
  state.previous_violation = max_violation;
}

TrainedModel pdl_train_lr(const data::Dataset& ds, const TrainConfig& config, double lr) {
  const auto& problem = *ds.problem;
  const auto mi = static_cast<Eigen::Index>(problem.m_ineq());
  const auto me = static_cast<Eigen::Index>(problem.m_eq());
  LTOF_REQUIRE(config.pdl.epochs_per_outer >= 1, "epochs_per_outer must be positive");
  PreparedInputs prepared = prepare_inputs(ds, config.mode);
  const auto in_dim = static_cast<std::size_t>(prepared.inputs.cols());
  PdlState state = pdl_initial_state(config.pdl);

  nn::Mlp dual = init_network(in_dim, problem.m_ineq() + problem.m_eq(), config, ds.k, 2);
  // Zero last layer: the dual network starts from lambda = mu = 0.
  const std::size_t last = dual.num_layers() - 1;
  dual.weight(last).setZero();
  dual.bias(last).setZero();
  nn::AdamState dual_adam(dual.num_parameters());
  Rng dual_rng(derive_seed(config.seed, 3));

  auto split_duals = [&](const Matrix& out, Eigen::Index row, Vector& lambda, Vector& mu) {
    lambda = out.row(row).head(mi).transpose().cwiseMax(0.0);
    mu = out.row(row).tail(me).transpose();
  };

  LoopSpec spec;
  spec.dataset = &ds;
  spec.inputs = &prepared.inputs;
  spec.net = init_network(in_dim, problem.n_decision(), config, ds.k, 1);
  spec.lr = lr;
  spec.epochs = config.epochs;
  spec.batch_size = config.batch_size;
  spec.patience = config.patience;
  spec.dropout = config.dropout;
  spec.seed = config.seed;
  spec.loss = [&](const IndexList& rows, const Matrix& Y, Matrix& dY) {
    const Matrix duals = nn::forward_batch(dual, gather_rows(prepared.inputs, rows));
    const double scale = 1.0 / static_cast<double>(rows.size());
    double total = 0.0;
    Vector grad, lambda, mu;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto b = static_cast<Eigen::Index>(i);
      split_duals(duals, b, lambda, mu);
      const Vector zeta = ds.zeta.row(static_cast<Eigen::Index>(rows[i])).transpose();
      total += pdl_sample_loss(problem, Y.row(b).transpose(), zeta, lambda, mu, state.rho, &grad);
      dY.row(b) = scale * grad.transpose();
    }
    return total * scale;
  };
  spec.end_epoch = [&](std::size_t epoch, const nn::Mlp& primal) {
    if (epoch % config.pdl.epochs_per_outer != 0) return;
    const IndexList& train = ds.splits.train;
    const Matrix X = gather_rows(prepared.inputs, train);
    const Matrix x_hat = nn::forward_batch(primal, X);
    const Matrix duals = nn::forward_batch(dual, X);
    Matrix targets(X.rows(), mi + me);
    double max_violation = 0.0;
    Vector lambda, mu, lt, mt;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const Vector zeta = ds.zeta.row(static_cast<Eigen::Index>(train[static_cast<std::size_t>(i)])).transpose();
      const Vector x = x_hat.row(i).transpose();
      const Vector g = mi > 0 ? problem.ineq_residuals(x, zeta) : Vector();
      const Vector h = me > 0 ? problem.eq_residuals(x, zeta) : Vector();
      if (mi > 0) max_violation = std::max(max_violation, g.maxCoeff());
      if (me > 0) max_violation = std::max(max_violation, h.cwiseAbs().maxCoeff());
      split_duals(duals, i, lambda, mu);
      pdl_dual_targets(lambda, mu, g, h, state.rho, lt, mt);
      targets.row(i).head(mi) = lt.transpose();
      targets.row(i).tail(me) = mt.transpose();
    }
    // Regress the dual network onto the updated multipliers.
    IndexList local(train.size());
    for (std::size_t i = 0; i < local.size(); ++i) local[i] = i;
    for (std::size_t pass = 0; pass < config.pdl.dual_epochs; ++pass) {
      for (const IndexList& rows : make_batches(local, config.batch_size, dual_rng)) {
        const Matrix Xb = gather_rows(X, rows);
        nn::Tape tape;
        const Matrix out = nn::forward_batch(dual, Xb, &tape);
        const Matrix dOut = (2.0 / static_cast<double>(rows.size())) * (out - gather_rows(targets, rows));
        const nn::BatchGradients grads = nn::backward_batch(dual, tape, dOut);
        nn::adam_step(dual_adam, dual.mutable_parameters(), grads.params, lr);
      }
    }
    pdl_update_rho(state, std::max(max_violation, 0.0));
  };

  LoopResult loop = run_training(std::move(spec));
  TrainedModel model;
  model.method = Method::pdl;
  model.mode = config.mode;
  model.k = ds.k;
  model.net = std::move(loop.best_net);
  model.scaler = std::move(prepared.scaler);
  model.pdl_rho = state.rho;
  model.dual_net = std::move(dual);
  model.lr = lr;
  model.best_epoch = loop.best_epoch;
  model.best_val_score = loop.best_score;
  model.history = std::move(loop.history);
  return model;
}

TrainedModel pdl_train(const data::Dataset& dataset, const TrainConfig& config) {
  return best_over_lr_grid(config.lr_grid,
                           [&](double lr) { return pdl_train_lr(dataset, config, lr); });
}

}  // namespace ltof::lto
