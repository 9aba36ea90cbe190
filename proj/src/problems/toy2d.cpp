#include "ltof/problems/toy2d.hpp"

#include "ltof/core/error.hpp"

namespace ltof::problems {

Toy2dProblem::Toy2dProblem() {
  lin_.A = Matrix(0, 2);
  lin_.b = Vector(0);
  lin_.G = Matrix(3, 2);
  lin_.G << 1.0, 2.0, 2.0, -1.0, 1.0, 1.0;
  lin_.h = Vector(3);
  lin_.h << 0.5, 0.2, 0.3;
}

double Toy2dProblem::objective(const Vector& x, const Vector& zeta) const {
  return zeta[0] * x[0] * x[0] + zeta[1] * x[1] * x[1];
}

Vector Toy2dProblem::grad_x_objective(const Vector& x, const Vector& zeta) const {
  return 2.0 * zeta.cwiseProduct(x);
}

Vector Toy2dProblem::grad_zeta_objective(const Vector& x, const Vector&) const {
  return x.cwiseProduct(x);
}

Vector Toy2dProblem::ineq_residuals(const Vector& x, const Vector&) const {
  return lin_.G * x - lin_.h;
}

Vector Toy2dProblem::eq_residuals(const Vector&, const Vector&) const { return Vector(0); }

Matrix Toy2dProblem::ineq_jacobian(const Vector&, const Vector&) const { return lin_.G; }

Matrix Toy2dProblem::eq_jacobian(const Vector&, const Vector&) const { return Matrix(0, 2); }

qp::QpProblem Toy2dProblem::to_qp(const Vector& zeta) const {
  LTOF_REQUIRE(zeta.size() == 2, "zeta must have two entries");
  return qp::QpProblem{Matrix((2.0 * zeta).asDiagonal()), Vector::Zero(2), lin_.A, lin_.b,
                       lin_.G, lin_.h};
}

Vector Toy2dProblem::ground_truth(const Vector& zeta) const {
  const qp::QpSolution sol = qp::solve_qp(to_qp(zeta));
  if (sol.status != qp::QpStatus::optimal) {
    throw SolverError("toy QP not solved (status " + qp::to_string(sol.status) + ")");
  }
  return sol.x;
}

nlohmann::json Toy2dProblem::to_json() const { return {{"tag", tag()}}; }

}  // namespace ltof::problems
