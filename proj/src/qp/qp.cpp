#include "ltof/qp/qp.hpp"

#include "ltof/core/error.hpp"
#include "ltof/core/json_util.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

namespace ltof::qp {

void QpProblem::validate() const {
  const auto nn = Q.rows();
  LTOF_REQUIRE(nn > 0 && Q.cols() == nn, "Q must be square and nonempty");
  LTOF_REQUIRE(q.size() == nn, "q length must equal n");
  LTOF_REQUIRE(A.cols() == nn || A.rows() == 0, "A must have n columns");
  LTOF_REQUIRE(b.size() == A.rows(), "b length must equal rows of A");
  LTOF_REQUIRE(G.cols() == nn || G.rows() == 0, "G must have n columns");
  LTOF_REQUIRE(h.size() == G.rows(), "h length must equal rows of G");
  LTOF_REQUIRE(Q.allFinite() && q.allFinite() && A.allFinite() && b.allFinite() &&
                   G.allFinite() && h.allFinite(),
               "problem data must be finite");
  LTOF_REQUIRE((Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-10, "Q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q, Eigen::EigenvaluesOnly);
  LTOF_REQUIRE(eig.eigenvalues().minCoeff() >= -1e-8, "Q must be positive semidefinite");
}

QpProblem unconstrained(const Matrix& Q, const Vector& q) {
  const auto nn = Q.rows();
  return QpProblem{Q, q, Matrix(0, nn), Vector(0), Matrix(0, nn), Vector(0)};
}

std::string to_string(QpStatus status) {
  switch (status) {
    case QpStatus::optimal:
      return "optimal";
    case QpStatus::max_iter:
      return "max_iter";
    case QpStatus::infeasible:
      return "infeasible";
  }
  return "unknown";
}

double KktResiduals::max() const {
  return std::max({stationarity, primal_eq, primal_ineq, dual_feasibility, complementarity});
}

KktResiduals kkt_residuals(const QpProblem& qp, const Vector& x, const Vector& dual_eq,
                           const Vector& dual_ineq) {
  KktResiduals r;
  Vector station = qp.Q * x + qp.q;
  if (qp.m_eq() > 0) {
    station += qp.A.transpose() * dual_eq;
    r.primal_eq = (qp.A * x - qp.b).cwiseAbs().maxCoeff();
  }
  if (qp.m_ineq() > 0) {
    station += qp.G.transpose() * dual_ineq;
    const Vector slack = qp.h - qp.G * x;
    r.primal_ineq = std::max(0.0, (-slack).maxCoeff());
    r.dual_feasibility = std::max(0.0, (-dual_ineq).maxCoeff());
    for (Eigen::Index i = 0; i < slack.size(); ++i) {
      r.complementarity = std::max(r.complementarity, std::abs(std::min(dual_ineq[i], slack[i])));
    }
  }
  r.stationarity = station.cwiseAbs().maxCoeff();
  return r;
}

nlohmann::json to_json(const QpProblem& qp) {
  return {{"Q", json_util::matrix_to_json(qp.Q)}, {"q", json_util::vector_to_json(qp.q)},
          {"A", json_util::matrix_to_json(qp.A)}, {"b", json_util::vector_to_json(qp.b)},
          {"G", json_util::matrix_to_json(qp.G)}, {"h", json_util::vector_to_json(qp.h)}};
}

QpProblem qp_from_json(const nlohmann::json& j) {
  using namespace json_util;
  QpProblem qp;
  qp.Q = matrix_from_json(field(j, "Q", "qp"), "qp.Q");
  const auto nn = qp.Q.cols();
  qp.q = vector_from_json(field(j, "q", "qp"), "qp.q");
  qp.A = matrix_from_json(field(j, "A", "qp"), "qp.A", nn);
  qp.b = vector_from_json(field(j, "b", "qp"), "qp.b");
  qp.G = matrix_from_json(field(j, "G", "qp"), "qp.G", nn);
  qp.h = vector_from_json(field(j, "h", "qp"), "qp.h");
  return qp;
}

}  // namespace ltof::qp
