#include "ltof/pto/epo_pgd.hpp"

#include "ltof/core/error.hpp"
#include "ltof/qp/qp_backward.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

namespace ltof::pto {

namespace {

constexpr double kMinReciprocalCondition = 1e-12;

const problems::NonconvexQpProblem& as_nonconvex(const data::Dataset& ds) {
  const auto* p = dynamic_cast<const problems::NonconvexQpProblem*>(ds.problem.get());
  LTOF_REQUIRE(p != nullptr, "PGD end-to-end training needs a nonconvex QP dataset");
  return *p;
}

}  // namespace

Matrix active_null_projector(const problems::LinearConstraints& lin, const Vector& x) {
  const auto n = x.size();
  IndexList active;
  for (Eigen::Index i = 0; i < lin.G.rows(); ++i) {
    if (lin.h[i] - lin.G.row(i).dot(x) <= qp::kActivityTolerance) active.push_back(static_cast<std::size_t>(i));
  }
  Matrix C(lin.A.rows() + static_cast<Eigen::Index>(active.size()), n);
  C.topRows(lin.A.rows()) = lin.A;
  for (std::size_t r = 0; r < active.size(); ++r) {
    C.row(lin.A.rows() + static_cast<Eigen::Index>(r)) = lin.G.row(static_cast<Eigen::Index>(active[r]));
  }
  Matrix P = Matrix::Identity(n, n);
  if (C.rows() == 0) return P;
  // Orthonormal basis of range(C') from a rank-revealing QR, so dependent
  // active rows do not break the projector.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(C.transpose());
  const auto rank = qr.rank();
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);
  P -= Q * Q.transpose();
  return P;
}

Vector pgd_fixed_point_vjp(const problems::NonconvexQpProblem& problem, const Vector& zeta,
                           const Vector& x, double step, const Vector& v) {
  const auto n = x.size();
  LTOF_REQUIRE(zeta.size() == n && v.size() == n && step > 0.0, "shape or step mismatch");
  const Matrix P = active_null_projector(*problem.linear_constraints(), x);
  const Vector hdiag = problem.hessian_diagonal(x, zeta);
  const Matrix M = Matrix::Identity(n, n) -
                   P * (Matrix::Identity(n, n) - step * Matrix(hdiag.asDiagonal()));
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M.transpose());
  if (!(lu.rcond() >= kMinReciprocalCondition)) {
    throw DegenerateSystem("fixed-point system is singular (rcond " + std::to_string(lu.rcond()) + ")");
  }
  const Vector w = lu.solve(v);
  return -step * x.array().cos().matrix().cwiseProduct(P * w);
}

double epo_pgd_sample_loss(const problems::NonconvexQpProblem& problem, const Vector& zeta_hat,
                           const Vector& zeta, Vector& start, qp::PolyhedronProjector& projector,
                           const problems::PgdSettings& settings, Vector* grad) {
  const problems::PgdResult r = problems::pgd_solve(problem, zeta_hat, start, projector, settings);
  if (!r.converged || !(r.residual <= problems::kFixedPointTolerance)) {
    throw SolverError("PGD did not reach a fixed point (residual " + std::to_string(r.residual) + ")");
  }
  start = r.x;
  if (grad) *grad = pgd_fixed_point_vjp(problem, zeta_hat, r.x, r.step, problem.grad_x_objective(r.x, zeta));
  return problem.objective(r.x, zeta);
}

PredictorModel epo_pgd_train_lr(const data::Dataset& ds, const PtoConfig& config, double lr) {
  const problems::NonconvexQpProblem& problem = as_nonconvex(ds);
  const problems::LinearConstraints& lin = *problem.linear_constraints();
  lto::PreparedInputs prepared = lto::prepare_inputs(ds, lto::Mode::ltof);
  qp::PolyhedronProjector projector(lin.A, lin.b, lin.G, lin.h);
  std::vector<Vector> starts(ds.size(), problem.canonical_start());
  std::size_t skipped = 0;

  lto::LoopSpec spec;
  spec.dataset = &ds;
  spec.inputs = &prepared.inputs;
  spec.net = init_predictor(static_cast<std::size_t>(prepared.inputs.cols()), problem.n_param(),
                            config, 41);
  spec.lr = lr;
  spec.epochs = config.epochs;
  spec.batch_size = config.batch_size;
  spec.patience = config.patience;
  spec.seed = derive_seed(config.seed, 42);
  spec.loss = [&](const IndexList& rows, const Matrix& Y, Matrix& dY) {
    const double scale = 1.0 / static_cast<double>(rows.size());
    double total = 0.0;
    Vector grad;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(rows[i]);
      const Vector zeta = ds.zeta.row(r).transpose();
      try {
        total += epo_pgd_sample_loss(problem, Y.row(static_cast<Eigen::Index>(i)).transpose(), zeta,
                                     starts[rows[i]], projector, config.pgd, &grad);
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
    Matrix X(zeta_hat.rows(), static_cast<Eigen::Index>(problem.n_decision()));
    for (Eigen::Index i = 0; i < zeta_hat.rows(); ++i) {
      X.row(i) = problems::pgd_solve(problem, zeta_hat.row(i).transpose(), problem.canonical_start(),
                                     projector, config.pgd).x.transpose();
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

PredictorModel epo_pgd_train(const data::Dataset& dataset, const PtoConfig& config) {
  return best_predictor_over_lr(config.lr_grid,
                                [&](double lr) { return epo_pgd_train_lr(dataset, config, lr); });
}

}  // namespace ltof::pto
