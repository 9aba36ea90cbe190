#include "ltof/problems/portfolio.hpp"

#include "ltof/core/error.hpp"
#include "ltof/core/json_util.hpp"

namespace ltof::problems {

PortfolioProblem::PortfolioProblem(Matrix sigma, double risk_weight)
    : dim_(static_cast<std::size_t>(sigma.rows())), sigma_(std::move(sigma)),
      risk_weight_(risk_weight) {
  LTOF_REQUIRE(dim_ > 0 && sigma_.cols() == sigma_.rows(), "Sigma must be square");
  LTOF_REQUIRE(risk_weight_ >= 0.0, "risk weight must be nonnegative");
  const auto n = static_cast<Eigen::Index>(dim_);
  constraints_.A = Matrix::Ones(1, n);
  constraints_.b = Vector::Ones(1);
  constraints_.G = -Matrix::Identity(n, n);
  constraints_.h = Vector::Zero(n);
  to_qp(Vector::Zero(n)).validate();
}

double PortfolioProblem::objective(const Vector& x, const Vector& zeta) const {
  return risk_weight_ * x.dot(sigma_ * x) - zeta.dot(x);
}

Vector PortfolioProblem::grad_x_objective(const Vector& x, const Vector& zeta) const {
  return 2.0 * risk_weight_ * (sigma_ * x) - zeta;
}

Vector PortfolioProblem::grad_zeta_objective(const Vector& x, const Vector&) const { return -x; }

Vector PortfolioProblem::ineq_residuals(const Vector& x, const Vector&) const { return -x; }

Vector PortfolioProblem::eq_residuals(const Vector& x, const Vector&) const {
  return Vector::Constant(1, x.sum() - 1.0);
}

Matrix PortfolioProblem::ineq_jacobian(const Vector&, const Vector&) const {
  return constraints_.G;
}

Matrix PortfolioProblem::eq_jacobian(const Vector&, const Vector&) const { return constraints_.A; }

qp::QpProblem PortfolioProblem::to_qp(const Vector& zeta) const {
  LTOF_REQUIRE(static_cast<std::size_t>(zeta.size()) == dim_, "zeta length mismatch");
  return qp::QpProblem{2.0 * risk_weight_ * sigma_, -zeta, constraints_.A, constraints_.b,
                       constraints_.G, constraints_.h};
}

Vector PortfolioProblem::ground_truth(const Vector& zeta) const {
  const qp::QpSolution sol = qp::solve_qp(to_qp(zeta));
  if (sol.status != qp::QpStatus::optimal) {
    throw SolverError("portfolio QP not solved (status " + qp::to_string(sol.status) + ")");
  }
  return sol.x;
}

nlohmann::json PortfolioProblem::to_json() const {
  return {{"tag", tag()},
          {"sigma", json_util::matrix_to_json(sigma_)},
          {"risk_weight", risk_weight_}};
}

}  // namespace ltof::problems
