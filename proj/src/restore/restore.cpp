#include "ltof/restore/restore.hpp"

#include "ltof/core/error.hpp"

#include <spdlog/spdlog.h>

#include <chrono>

namespace ltof::restore {

namespace {

constexpr double kMinReciprocalCondition = 1e-12;

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

void fill_violation(const problems::ParametricProblem& problem, const Vector& zeta,
                    RestorationResult& r) {
  const problems::Violation v = problems::violation(problem, r.x, zeta);
  r.ineq_violation = v.ineq;
  r.eq_violation = v.eq;
  r.converged = v.max() <= kRestoreTolerance;
}

/// Solves the least-squares / minimum-norm system for J dx = -f.
Vector gauss_newton_step(const Matrix& J, const Vector& f, double damping) {
  const bool tall = J.rows() >= J.cols();
  Eigen::MatrixXd normal = tall ? Eigen::MatrixXd(J.transpose() * J) : Eigen::MatrixXd(J * J.transpose());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() >= kMinReciprocalCondition)) {
    spdlog::warn("newton_restore: ill-conditioned normal matrix, adding damping {}", damping);
    normal.diagonal().array() += damping;
    ldlt.compute(normal);
  }
  if (tall) return ldlt.solve(-(J.transpose() * f));
  return J.transpose() * ldlt.solve(-f);
}

}  // namespace

Vector clip_normalize_simplex(const Vector& x_hat) {
  LTOF_REQUIRE(x_hat.size() > 0 && x_hat.allFinite(), "input must be finite and nonempty");
  Vector x = x_hat.cwiseMax(0.0);
  const double mass = x.sum();
  if (!(mass > 0.0)) return Vector::Constant(x.size(), 1.0 / static_cast<double>(x.size()));
  return x / mass;
}

RestorationResult newton_restore(const ResidualFn& residual, const JacobianFn& jacobian,
                                 const Vector& x0, const NewtonSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  RestorationResult out;
  Vector x = x0;
  Vector f = residual(x);
  out.x = x;
  double best = max_abs(f);
  for (std::size_t iter = 0;; ++iter) {
    const double err = max_abs(f);
    if (err < best) {
      best = err;
      out.x = x;
    }
    if (err < settings.tol) {
      out.converged = true;
      out.x = x;
      out.iterations = iter;
      break;
    }
    if (iter == settings.max_iter) {
      out.iterations = iter;
      break;
    }
    const Matrix J = jacobian(x);
    LTOF_REQUIRE(J.rows() == f.size() && J.cols() == x.size(), "Jacobian shape mismatch");
    const Vector dx = gauss_newton_step(J, f, settings.damping);
    if (!dx.allFinite()) {
      out.iterations = iter;
      break;
    }
    x += dx;
    f = residual(x);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

RestorationResult newton_restore(const problems::ParametricProblem& problem, const Vector& x0,
                                 const Vector& zeta, const NewtonSettings& settings) {
  const auto n = static_cast<Eigen::Index>(problem.n_decision());
  const auto mi = static_cast<Eigen::Index>(problem.m_ineq());
  const auto me = static_cast<Eigen::Index>(problem.m_eq());
  // Inequality rows with g_i <= 0 contribute a zero residual and a zero
  // Jacobian row under the ReLU, so the step only needs the violated rows.
  auto violated_rows = [&](const Vector& g) {
    IndexList rows;
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (g[i] > 0.0) rows.push_back(static_cast<std::size_t>(i));
    }
    return rows;
  };
  ResidualFn residual = [&](const Vector& x) {
    const Vector g = mi > 0 ? problem.ineq_residuals(x, zeta) : Vector();
    const IndexList rows = violated_rows(g);
    Vector f(static_cast<Eigen::Index>(rows.size()) + me);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      f[static_cast<Eigen::Index>(r)] = g[static_cast<Eigen::Index>(rows[r])];
    }
    if (me > 0) f.tail(me) = problem.eq_residuals(x, zeta);
    return f;
  };
  JacobianFn jacobian = [&](const Vector& x) {
    const Vector g = mi > 0 ? problem.ineq_residuals(x, zeta) : Vector();
    const IndexList rows = violated_rows(g);
    Matrix J(static_cast<Eigen::Index>(rows.size()) + me, n);
    if (!rows.empty()) {
      const Matrix Jg = problem.ineq_jacobian(x, zeta);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        J.row(static_cast<Eigen::Index>(r)) = Jg.row(static_cast<Eigen::Index>(rows[r]));
      }
    }
    if (me > 0) J.bottomRows(me) = problem.eq_jacobian(x, zeta);
    return J;
  };
  RestorationResult out = newton_restore(residual, jacobian, x0, settings);
  const Vector g = mi > 0 ? problem.ineq_residuals(out.x, zeta) : Vector();
  const Vector h = me > 0 ? problem.eq_residuals(out.x, zeta) : Vector();
  out.ineq_violation = mi > 0 ? std::max(0.0, g.maxCoeff()) : 0.0;
  out.eq_violation = max_abs(h);
  out.converged = out.ineq_violation < settings.tol && out.eq_violation < settings.tol;
  return out;
}

Restorer::Restorer(std::shared_ptr<const problems::ParametricProblem> problem)
    : problem_(std::move(problem)) {
  LTOF_REQUIRE(problem_ != nullptr, "null problem");
  if (problem_->restoration_policy() == problems::RestorationPolicy::projection) {
    const problems::LinearConstraints* lin = problem_->linear_constraints();
    LTOF_REQUIRE(lin != nullptr, "projection restoration needs linear constraints");
    projector_.emplace(lin->A, lin->b, lin->G, lin->h);
  }
}

RestorationResult Restorer::restore(const Vector& x_hat, const Vector& zeta) {
  LTOF_REQUIRE(static_cast<std::size_t>(x_hat.size()) == problem_->n_decision(),
               "decision length mismatch");
  const auto start = std::chrono::steady_clock::now();
  RestorationResult out;
  switch (problem_->restoration_policy()) {
    case problems::RestorationPolicy::clip_normalize:
      out.x = clip_normalize_simplex(x_hat);
      fill_violation(*problem_, zeta, out);
      break;
    case problems::RestorationPolicy::projection:
      out.x = projector_->project(x_hat);
      out.iterations = 1;
      fill_violation(*problem_, zeta, out);
      break;
    case problems::RestorationPolicy::newton:
      out = newton_restore(*problem_, x_hat, zeta);
      break;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

RestorationResult restore_for(std::shared_ptr<const problems::ParametricProblem> problem,
                              const Vector& x_hat, const Vector& zeta) {
  Restorer restorer(std::move(problem));
  return restorer.restore(x_hat, zeta);
}

}  // namespace ltof::restore
