#include "ltof/qp/qp_backward.hpp"

#include "ltof/core/error.hpp"

namespace ltof::qp {

namespace {
constexpr double kMinReciprocalCondition = 1e-12;
}

IndexList active_inequalities(const QpProblem& qp, const Vector& x, double tol) {
  IndexList active;
  if (qp.m_ineq() == 0) return active;
  const Vector slack = qp.h - qp.G * x;
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    if (slack[i] <= tol) active.push_back(static_cast<std::size_t>(i));
  }
  return active;
}

Vector qp_backward(const QpProblem& qp, const QpSolution& sol, const Vector& dl_dx) {
  LTOF_REQUIRE(sol.status == QpStatus::optimal, "solution must be optimal");
  LTOF_REQUIRE(static_cast<std::size_t>(dl_dx.size()) == qp.n(), "gradient length mismatch");
  const IndexList active = active_inequalities(qp, sol.x);
  const auto n = static_cast<Eigen::Index>(qp.n());
  const auto m_eq = static_cast<Eigen::Index>(qp.m_eq());
  const auto s = m_eq + static_cast<Eigen::Index>(active.size());

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + s, n + s);
  K.topLeftCorner(n, n) = qp.Q;
  if (m_eq > 0) {
    K.block(n, 0, m_eq, n) = qp.A;
    K.block(0, n, n, m_eq) = qp.A.transpose();
  }
  for (std::size_t r = 0; r < active.size(); ++r) {
    const auto row = n + m_eq + static_cast<Eigen::Index>(r);
    const auto g = static_cast<Eigen::Index>(active[r]);
    K.block(row, 0, 1, n) = qp.G.row(g);
    K.block(0, row, n, 1) = qp.G.row(g).transpose();
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
  if (!(lu.rcond() >= kMinReciprocalCondition)) {
    throw DegenerateSystem("KKT system at the active set is singular");
  }
  Vector rhs = Vector::Zero(n + s);
  rhs.head(n) = dl_dx;
  // K is symmetric, so the transposed system is K itself.
  const Vector w = lu.solve(rhs);
  return -w.head(n);
}

}  // namespace ltof::qp
