#include "ltof/pto/epo_qp.hpp"

#include "ltof/core/error.hpp"
#include "ltof/problems/portfolio.hpp"
#include "ltof/problems/toy2d.hpp"
#include "ltof/qp/qp_backward.hpp"

namespace ltof::pto {

qp::QpProblem convex_qp_for(const problems::ParametricProblem& problem, const Vector& zeta) {
  if (const auto* p = dynamic_cast<const problems::PortfolioProblem*>(&problem)) return p->to_qp(zeta);
  if (const auto* t = dynamic_cast<const problems::Toy2dProblem*>(&problem)) return t->to_qp(zeta);
  throw ContractViolation("problem '" + problem.tag() + "' has no QP form with a linear parameter");
}

namespace {

qp::QpSolution solve_warm(qp::QpSolver& solver, const Vector& q) {
  solver.set_linear_term(q);
  qp::QpSolution sol = solver.solve();
  if (sol.status != qp::QpStatus::optimal) {
    solver.reset();
    sol = solver.solve();
  }
  return sol;
}

}  // namespace

double epo_qp_sample_loss(const problems::ParametricProblem& problem, const Vector& zeta_hat,
                          const Vector& zeta, Vector* grad, qp::QpSolver* solver) {
  const qp::QpProblem qp = convex_qp_for(problem, zeta_hat);
  const qp::QpSolution sol = solver ? solve_warm(*solver, qp.q) : qp::solve_qp(qp);
  if (sol.status != qp::QpStatus::optimal) {
    throw SolverError("QP solve ended with status " + qp::to_string(sol.status));
  }
  const double loss = problem.objective(sol.x, zeta);
  if (grad) *grad = -qp::qp_backward(qp, sol, problem.grad_x_objective(sol.x, zeta));
  return loss;
}

PredictorModel epo_qp_train_lr(const data::Dataset& ds, const PtoConfig& config, double lr) {
  const auto& problem = *ds.problem;
  lto::PreparedInputs prepared = lto::prepare_inputs(ds, lto::Mode::ltof);
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(problem.n_param()));
  qp::QpSolver solver(convex_qp_for(problem, zero));
  std::size_t skipped = 0;

  lto::LoopSpec spec;
  spec.dataset = &ds;
  spec.inputs = &prepared.inputs;
  spec.net = init_predictor(static_cast<std::size_t>(prepared.inputs.cols()), problem.n_param(),
                            config, 31);
  spec.lr = lr;
  spec.epochs = config.epochs;
  spec.batch_size = config.batch_size;
  spec.patience = config.patience;
  spec.seed = derive_seed(config.seed, 32);
  spec.loss = [&](const IndexList& rows, const Matrix& Y, Matrix& dY) {
    const double scale = 1.0 / static_cast<double>(rows.size());
    double total = 0.0;
    Vector grad;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(rows[i]);
      const Vector zeta = ds.zeta.row(r).transpose();
      try {
        total += epo_qp_sample_loss(problem, Y.row(static_cast<Eigen::Index>(i)).transpose(), zeta,
                                    &grad, &solver);
        // Reported as regret; the constant f(x*) does not change the gradient.
        if (ds.has_targets()) total -= problem.objective(ds.x_star.row(r).transpose(), zeta);
        dY.row(static_cast<Eigen::Index>(i)) = scale * grad.transpose();
      } catch (const SolverError&) {
        ++skipped;
      } catch (const DegenerateSystem&) {
        ++skipped;
      }
    }
    return total * scale;
  };
  spec.decode = [&](const Matrix& zeta_hat) {
    Matrix X = Matrix::Zero(zeta_hat.rows(), static_cast<Eigen::Index>(problem.n_decision()));
    for (Eigen::Index i = 0; i < zeta_hat.rows(); ++i) {
      const qp::QpSolution sol = solve_warm(solver, convex_qp_for(problem, zeta_hat.row(i).transpose()).q);
      if (sol.status == qp::QpStatus::optimal) X.row(i) = sol.x.transpose();
    }
    return X;
  };

  lto::LoopResult loop = lto::run_training(std::move(spec));
  PredictorModel model;
  model.kind = Baseline::epo;
  model.m = config.m;
  model.net = std::move(loop.best_net);
  model.scaler = std::move(prepared.scaler);
  model.lr = lr;
  model.best_epoch = loop.best_epoch;
  model.best_val_score = loop.best_score;
  model.history = std::move(loop.history);
  model.skipped = skipped;
  return model;
}

PredictorModel epo_qp_train(const data::Dataset& dataset, const PtoConfig& config) {
  return best_predictor_over_lr(config.lr_grid,
                                [&](double lr) { return epo_qp_train_lr(dataset, config, lr); });
}

}  // namespace ltof::pto
