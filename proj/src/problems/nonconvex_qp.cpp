#include "ltof/problems/nonconvex_qp.hpp"

#include "ltof/core/error.hpp"
#include "ltof/core/json_util.hpp"
#include "ltof/problems/pgd.hpp"

namespace ltof::problems {

NonconvexQpProblem::NonconvexQpProblem(Vector mu, Matrix A, Vector b, Matrix G, Vector h,
                                       std::size_t restarts, std::uint64_t restart_seed)
    : mu_(std::move(mu)), lin_{std::move(A), std::move(b), std::move(G), std::move(h)},
      restarts_(restarts), restart_seed_(restart_seed) {
  const auto n = mu_.size();
  LTOF_REQUIRE(n > 0, "decision dimension must be positive");
  LTOF_REQUIRE((mu_.array() >= 0.0).all(), "mu must be nonnegative");
  LTOF_REQUIRE(lin_.A.cols() == n && lin_.A.rows() > 0 && lin_.b.size() == lin_.A.rows(),
               "A must be m_eq x n with matching b");
  LTOF_REQUIRE(lin_.G.cols() == n && lin_.h.size() == lin_.G.rows(),
               "G must be m_ineq x n with matching h");
  LTOF_REQUIRE(restarts_ >= 1, "at least one restart is required");
  const Eigen::MatrixXd gram = lin_.A * lin_.A.transpose();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-12)) {
    throw DegenerateSystem("A must have full row rank");
  }
  canonical_start_ = lin_.A.transpose() * ldlt.solve(lin_.b);
}

double NonconvexQpProblem::objective(const Vector& x, const Vector& zeta) const {
  return 0.5 * x.dot(mu_.cwiseProduct(x)) + zeta.dot(x.array().sin().matrix());
}

Vector NonconvexQpProblem::grad_x_objective(const Vector& x, const Vector& zeta) const {
  return mu_.cwiseProduct(x) + zeta.cwiseProduct(x.array().cos().matrix());
}

Vector NonconvexQpProblem::grad_zeta_objective(const Vector& x, const Vector&) const {
  return x.array().sin().matrix();
}

Vector NonconvexQpProblem::hessian_diagonal(const Vector& x, const Vector& zeta) const {
  return mu_ - zeta.cwiseProduct(x.array().sin().matrix());
}

double NonconvexQpProblem::lipschitz_bound(const Vector& zeta) const {
  return (mu_ + zeta.cwiseAbs()).maxCoeff();
}

Vector NonconvexQpProblem::ineq_residuals(const Vector& x, const Vector&) const {
  return lin_.G * x - lin_.h;
}

Vector NonconvexQpProblem::eq_residuals(const Vector& x, const Vector&) const {
  return lin_.A * x - lin_.b;
}

Matrix NonconvexQpProblem::ineq_jacobian(const Vector&, const Vector&) const { return lin_.G; }

Matrix NonconvexQpProblem::eq_jacobian(const Vector&, const Vector&) const { return lin_.A; }

Vector NonconvexQpProblem::ground_truth(const Vector& zeta) const {
  return nonconvex_ground_truth(*this, zeta, restarts_).x;
}

nlohmann::json NonconvexQpProblem::to_json() const {
  using namespace json_util;
  return {{"tag", tag()},
          {"mu", vector_to_json(mu_)},
          {"A", matrix_to_json(lin_.A)},
          {"b", vector_to_json(lin_.b)},
          {"G", matrix_to_json(lin_.G)},
          {"h", vector_to_json(lin_.h)},
          {"restarts", restarts_},
          {"restart_seed", restart_seed_}};
}

}  // namespace ltof::problems
