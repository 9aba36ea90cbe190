#pragma once

#include "ltof/core/types.hpp"

#include <json.hpp>

#include <cstddef>
#include <memory>
#include <string>

namespace ltof::qp {

/// minimize 1/2 x'Qx + q'x  subject to  Ax = b,  Gx <= h.
struct QpProblem {
  Matrix Q;
  Vector q;
  Matrix A;  // m_eq x n, may have zero rows
  Vector b;
  Matrix G;  // m_ineq x n, may have zero rows
  Vector h;

  std::size_t n() const { return static_cast<std::size_t>(Q.rows()); }
  std::size_t m_eq() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t m_ineq() const { return static_cast<std::size_t>(G.rows()); }

  /// Throws ContractViolation when shapes are inconsistent, Q is asymmetric
  /// beyond 1e-10, or Q has an eigenvalue below -1e-8.
  void validate() const;

  double objective(const Vector& x) const { return 0.5 * x.dot(Q * x) + q.dot(x); }
};

/// Builds an empty-constraint problem of dimension n.
QpProblem unconstrained(const Matrix& Q, const Vector& q);

enum class QpStatus { optimal, max_iter, infeasible };
std::string to_string(QpStatus status);

struct QpSolution {
  Vector x;
  Vector dual_ineq;  // >= 0 at optimality
  Vector dual_eq;
  QpStatus status = QpStatus::max_iter;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::size_t iterations = 0;
  bool polished = false;
};

/// Componentwise KKT measures of a primal-dual pair (infinity norms).
struct KktResiduals {
  double stationarity = 0.0;     // |Qx + q + A'nu + G'lambda|
  double primal_eq = 0.0;        // |Ax - b|
  double primal_ineq = 0.0;      // |max(Gx - h, 0)|
  double dual_feasibility = 0.0; // |max(-lambda, 0)|
  double complementarity = 0.0;  // max_i |min(lambda_i, h_i - G_i x)|

  double max() const;
};

KktResiduals kkt_residuals(const QpProblem& qp, const Vector& x, const Vector& dual_eq,
                           const Vector& dual_ineq);

struct QpSettings {
  double eps_abs = 1e-8;
  double eps_rel = 1e-8;
  std::size_t max_iter = 50000;
  double rho = 0.1;
  double sigma = 1e-6;
  double relaxation = 1.6;
  double eps_infeasible = 1e-9;
  bool polish = true;
  bool adaptive_rho = true;
  std::size_t check_interval = 5;
};

/// ADMM solver (operator splitting on the constraint slack) with over-relaxation,
/// adaptive penalty and active-set polishing.
///
/// The matrices Q, A, G are fixed at construction; the linear term and the
/// right-hand sides may be changed between solves. The iterate state persists
/// across calls to `solve()` unless `reset()` is called, which gives a warm
/// start for sequences of nearby problems.
class QpSolver {
 public:
  explicit QpSolver(QpProblem qp, QpSettings settings = {});
  ~QpSolver();
  QpSolver(QpSolver&&) noexcept;
  QpSolver& operator=(QpSolver&&) noexcept;

  void set_linear_term(const Vector& q);
  void set_rhs(const Vector& b, const Vector& h);
  void reset();

  QpSolution solve();

  const QpProblem& problem() const;
  const QpSettings& settings() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Solves `qp` from a cold start. status=optimal guarantees every KKT residual
/// is <= tol.
QpSolution solve_qp(const QpProblem& qp, double tol = 1e-8, std::size_t max_iter = 50000);

nlohmann::json to_json(const QpProblem& qp);
QpProblem qp_from_json(const nlohmann::json& j);

}  // namespace ltof::qp
