#include "ltof/lto/dc3.hpp"

#include "ltof/core/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <numeric>

namespace ltof::lto {

namespace {
constexpr double kMinBlockRcond = 1e-10;
constexpr int kPartitionAttempts = 100;
}  // namespace

Dc3Completion make_completion(const problems::LinearConstraints& lin, const IndexList& completed,
                              double step_scale) {
  const auto n = std::max(lin.A.cols(), lin.G.cols());
  const auto me = lin.A.rows();
  LTOF_REQUIRE(static_cast<Eigen::Index>(completed.size()) == me,
               "one completed variable per equality is required");
  Dc3Completion c;
  c.completed = completed;
  std::vector<char> is_completed(static_cast<std::size_t>(n), 0);
  for (std::size_t j : completed) {
    LTOF_REQUIRE(j < static_cast<std::size_t>(n) && !is_completed[j], "invalid completed index");
    is_completed[j] = 1;
  }
  for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
    if (!is_completed[j]) c.partial.push_back(j);
  }
  const auto np = static_cast<Eigen::Index>(c.partial.size());
  c.Z = Matrix::Zero(n, np);
  c.x0 = Vector::Zero(n);
  for (Eigen::Index p = 0; p < np; ++p) c.Z(static_cast<Eigen::Index>(c.partial[static_cast<std::size_t>(p)]), p) = 1.0;
  if (me > 0) {
    Eigen::MatrixXd Ac(me, me);
    Eigen::MatrixXd Ap(me, np);
    for (Eigen::Index j = 0; j < me; ++j) Ac.col(j) = lin.A.col(static_cast<Eigen::Index>(completed[static_cast<std::size_t>(j)]));
    for (Eigen::Index p = 0; p < np; ++p) Ap.col(p) = lin.A.col(static_cast<Eigen::Index>(c.partial[static_cast<std::size_t>(p)]));
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Ac);
    LTOF_REQUIRE(lu.rcond() >= kMinBlockRcond, "equality block on the completed variables is singular");
    const Eigen::MatrixXd solved = -lu.solve(Ap);
    const Vector base = lu.solve(Eigen::VectorXd(lin.b));
    for (Eigen::Index j = 0; j < me; ++j) {
      const auto row = static_cast<Eigen::Index>(completed[static_cast<std::size_t>(j)]);
      c.Z.row(row) = solved.row(j);
      c.x0[row] = base[j];
    }
  }
  c.G = lin.G;
  c.h = lin.h;
  c.ZZt = c.Z * c.Z.transpose();
  if (c.G.rows() > 0 && np > 0) {
    const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(Eigen::MatrixXd(c.G * c.Z)).singularValues()(0);
    c.step = norm > 0.0 ? step_scale / (norm * norm) : 0.0;
  }
  return c;
}

Dc3Completion make_default_completion(const problems::LinearConstraints& lin, std::uint64_t seed,
                                      double step_scale) {
  const auto n = static_cast<std::size_t>(std::max(lin.A.cols(), lin.G.cols()));
  const auto me = static_cast<std::size_t>(lin.A.rows());
  IndexList order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (int attempt = 0; attempt < kPartitionAttempts; ++attempt) {
    IndexList completed(order.end() - static_cast<std::ptrdiff_t>(me), order.end());
    std::sort(completed.begin(), completed.end());
    try {
      return make_completion(lin, completed, step_scale);
    } catch (const ContractViolation&) {
      rng.shuffle(order);
    }
  }
  throw ContractViolation("no invertible completion block found");
}

Matrix Dc3Completion::complete(const Matrix& xp) const {
  LTOF_REQUIRE(static_cast<std::size_t>(xp.cols()) == n_partial(), "partial width mismatch");
  Matrix X = xp * Z.transpose();
  X.rowwise() += x0.transpose();
  return X;
}

Matrix Dc3Completion::correct(const Matrix& X_in, std::size_t steps, std::vector<Matrix>* trace) const {
  Matrix X = X_in;
  if (trace) trace->clear();
  if (G.rows() == 0 || step == 0.0) {
    if (trace) trace->assign(steps, X);
    return X;
  }
  for (std::size_t t = 0; t < steps; ++t) {
    if (trace) trace->push_back(X);
    Matrix violation = X * G.transpose();
    violation.rowwise() -= h.transpose();
    violation = violation.cwiseMax(0.0);
    X -= step * (violation * G) * ZZt;
  }
  return X;
}

Matrix Dc3Completion::backward(const std::vector<Matrix>& trace, const Matrix& d_out) const {
  Matrix d = d_out;
  if (G.rows() > 0 && step != 0.0) {
    for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
      Matrix slack = (*it) * G.transpose();
      slack.rowwise() -= h.transpose();
      const Matrix mask = (slack.array() > 0.0).cast<double>().matrix();
      d -= step * ((d * ZZt * G.transpose()).cwiseProduct(mask)) * G;
    }
  }
  return d * Z;
}

double dc3_sample_loss(const problems::ParametricProblem& problem, const Vector& x,
                       const Vector& zeta, double lambda, double mu, Vector* grad) {
  double loss = problem.objective(x, zeta);
  if (grad) *grad = problem.grad_x_objective(x, zeta);
  if (problem.m_ineq() > 0) {
    const Vector gp = problem.ineq_residuals(x, zeta).cwiseMax(0.0);
    loss += lambda * gp.squaredNorm();
    if (grad) *grad += 2.0 * lambda * (problem.ineq_jacobian(x, zeta).transpose() * gp);
  }
  if (problem.m_eq() > 0) {
    const Vector h = problem.eq_residuals(x, zeta);
    loss += mu * h.squaredNorm();
    if (grad) *grad += 2.0 * mu * (problem.eq_jacobian(x, zeta).transpose() * h);
  }
  return loss;
}

TrainedModel dc3_train_lr(const data::Dataset& ds, const TrainConfig& config, double lr) {
  const auto& problem = *ds.problem;
  const problems::LinearConstraints* lin = problem.linear_constraints();
  LTOF_REQUIRE(lin != nullptr, "DC3 needs constraints linear in x");
  const Dc3Completion completion =
      config.dc3.completed.empty()
          ? make_default_completion(*lin, derive_seed(config.seed, 4), config.dc3.step_scale)
          : make_completion(*lin, config.dc3.completed, config.dc3.step_scale);
  PreparedInputs prepared = prepare_inputs(ds, config.mode);

  LoopSpec spec;
  spec.dataset = &ds;
  spec.inputs = &prepared.inputs;
  spec.net = init_network(static_cast<std::size_t>(prepared.inputs.cols()), completion.n_partial(),
                          config, ds.k, 1);
  spec.lr = lr;
  spec.epochs = config.epochs;
  spec.batch_size = config.batch_size;
  spec.patience = config.patience;
  spec.dropout = config.dropout;
  spec.seed = config.seed;
  spec.loss = [&](const IndexList& rows, const Matrix& Y, Matrix& dY) {
    std::vector<Matrix> trace;
    const Matrix X = completion.correct(completion.complete(Y), config.dc3.t_train, &trace);
    Matrix dX(X.rows(), X.cols());
    const double scale = 1.0 / static_cast<double>(rows.size());
    double total = 0.0;
    Vector grad;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto b = static_cast<Eigen::Index>(i);
      const Vector zeta = ds.zeta.row(static_cast<Eigen::Index>(rows[i])).transpose();
      total += dc3_sample_loss(problem, X.row(b).transpose(), zeta, config.dc3.lambda,
                               config.dc3.mu, &grad);
      dX.row(b) = scale * grad.transpose();
    }
    dY = completion.backward(trace, dX);
    return total * scale;
  };
  spec.decode = [&](const Matrix& Y) {
    return completion.correct(completion.complete(Y), config.dc3.t_test);
  };

  LoopResult loop = run_training(std::move(spec));
  TrainedModel model;
  model.method = Method::dc3;
  model.mode = config.mode;
  model.k = ds.k;
  model.net = std::move(loop.best_net);
  model.scaler = std::move(prepared.scaler);
  model.dc3 = completion;
  model.t_test = config.dc3.t_test;
  model.lr = lr;
  model.best_epoch = loop.best_epoch;
  model.best_val_score = loop.best_score;
  model.history = std::move(loop.history);
  return model;
}

TrainedModel dc3_train(const data::Dataset& dataset, const TrainConfig& config) {
  return best_over_lr_grid(config.lr_grid,
                           [&](double lr) { return dc3_train_lr(dataset, config, lr); });
}

}  // namespace ltof::lto
