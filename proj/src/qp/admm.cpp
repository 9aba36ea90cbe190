#include "ltof/core/error.hpp"
#include "ltof/qp/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ltof::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEqualityRhoScale = 1e3;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kPolishDelta = 1e-11;
constexpr int kRefineSteps = 4;
constexpr std::size_t kRhoUpdateInterval = 25;
constexpr std::size_t kMinItersForInfeasibility = 50;

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

struct QpSolver::Impl {
  QpProblem qp;
  QpSettings settings;

  Matrix C;  // [A; G]
  Vector lower;
  Vector upper;
  std::size_t m_eq = 0;
  std::size_t m = 0;
  std::size_t n = 0;

  double rho = 0.1;
  Vector rho_vec;
  Eigen::LLT<Eigen::MatrixXd> factor;

  Vector x, z, y;
  bool has_state = false;
  std::vector<char> last_failed_active;

  void build_bounds() {
    lower.resize(static_cast<Eigen::Index>(m));
    upper.resize(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m_eq; ++i) {
      lower[static_cast<Eigen::Index>(i)] = qp.b[static_cast<Eigen::Index>(i)];
      upper[static_cast<Eigen::Index>(i)] = qp.b[static_cast<Eigen::Index>(i)];
    }
    for (std::size_t i = m_eq; i < m; ++i) {
      lower[static_cast<Eigen::Index>(i)] = -kInf;
      upper[static_cast<Eigen::Index>(i)] = qp.h[static_cast<Eigen::Index>(i - m_eq)];
    }
  }

  void set_rho(double value) {
    rho = std::clamp(value, kRhoMin, kRhoMax);
    rho_vec.resize(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      rho_vec[static_cast<Eigen::Index>(i)] = i < m_eq ? rho * kEqualityRhoScale : rho;
    }
    Eigen::MatrixXd K = qp.Q;
    K.diagonal().array() += settings.sigma;
    if (m > 0) K += C.transpose() * rho_vec.asDiagonal() * C;
    factor.compute(K);
    if (factor.info() != Eigen::Success) {
      throw SolverError("ADMM system is not positive definite; Q must be PSD");
    }
  }

  void cold_start() {
    x = Vector::Zero(static_cast<Eigen::Index>(n));
    z = Vector::Zero(static_cast<Eigen::Index>(m));
    y = Vector::Zero(static_cast<Eigen::Index>(m));
    has_state = false;
    last_failed_active.clear();
  }

  KktResiduals residuals_of(const Vector& xs, const Vector& ys) const {
    return kkt_residuals(qp, xs, ys.head(static_cast<Eigen::Index>(m_eq)),
                         ys.tail(static_cast<Eigen::Index>(m - m_eq)));
  }

  std::vector<char> guess_active() const {
    std::vector<char> active(m - m_eq, 0);
    for (std::size_t i = m_eq; i < m; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      active[i - m_eq] = (upper[k] - z[k] < y[k]) ? 1 : 0;
    }
    return active;
  }

  /// Solves the equality-constrained KKT system on the guessed active set.
  /// Returns true and fills (xp, yp) when the result certifies optimality.
  bool polish(const std::vector<char>& active, Vector& xp, Vector& yp) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < m_eq; ++i) rows.push_back(i);
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (active[i]) rows.push_back(m_eq + i);
    }
    const auto s = static_cast<Eigen::Index>(rows.size());
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nn + s, nn + s);
    K.topLeftCorner(nn, nn) = qp.Q;
    Vector rhs(nn + s);
    rhs.head(nn) = -qp.q;
    for (Eigen::Index r = 0; r < s; ++r) {
      const auto row = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]);
      K.block(nn + r, 0, 1, nn) = C.row(row);
      K.block(0, nn + r, nn, 1) = C.row(row).transpose();
      rhs[nn + r] = upper[row];
    }
    Eigen::MatrixXd K_reg = K;
    K_reg.diagonal().head(nn).array() += kPolishDelta;
    K_reg.diagonal().tail(s).array() -= kPolishDelta;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(K_reg);
    Vector sol = lu.solve(rhs);
    for (int it = 0; it < kRefineSteps; ++it) {
      const Vector r = rhs - K * sol;
      sol += lu.solve(r);
    }
    if (!sol.allFinite()) return false;
    xp = sol.head(nn);
    yp = Vector::Zero(static_cast<Eigen::Index>(m));
    for (Eigen::Index r = 0; r < s; ++r) {
      yp[static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)])] = sol[nn + r];
    }
    return residuals_of(xp, yp).max() <= settings.eps_abs;
  }

  bool infeasibility_certificate(const Vector& dy) const {
    const double norm = inf_norm(dy);
    if (norm <= 1e-30) return false;
    const double eps = settings.eps_infeasible * norm;
    if (inf_norm(C.transpose() * dy) > eps) return false;
    double support = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      if (i < m_eq) {
        support += upper[k] * dy[k];
      } else {
        if (dy[k] < -eps) return false;
        support += upper[k] * std::max(dy[k], 0.0);
      }
    }
    return support < -eps;
  }

  QpSolution finish(QpSolution sol, const Vector& xs, const Vector& ys) {
    sol.x = xs;
    sol.dual_eq = ys.head(static_cast<Eigen::Index>(m_eq));
    sol.dual_ineq = ys.tail(static_cast<Eigen::Index>(m - m_eq));
    const KktResiduals r = residuals_of(xs, ys);
    sol.primal_residual = std::max(r.primal_eq, r.primal_ineq);
    sol.dual_residual = r.stationarity;
    return sol;
  }

  QpSolution run() {
    QpSolution out;
    const double alpha = settings.relaxation;
    const double sigma = settings.sigma;

    auto try_polish = [&](QpSolution& result) -> bool {
      if (!settings.polish) return false;
      const std::vector<char> active = guess_active();
      if (active == last_failed_active) return false;
      Vector xp;
      Vector yp;
      if (polish(active, xp, yp)) {
        x = xp;
        y = yp;
        z = C * xp;
        has_state = true;
        result.polished = true;
        result.status = QpStatus::optimal;
        result = finish(result, xp, yp);
        return true;
      }
      last_failed_active = active;
      return false;
    };

    if (has_state && try_polish(out)) {
      out.iterations = 0;
      return out;
    }

    Vector y_check = y;
    Vector x_tilde(static_cast<Eigen::Index>(n));
    for (std::size_t iter = 1; iter <= settings.max_iter; ++iter) {
      Vector rhs = sigma * x - qp.q;
      if (m > 0) rhs += C.transpose() * (rho_vec.cwiseProduct(z) - y);
      x_tilde = factor.solve(rhs);
      x = alpha * x_tilde + (1.0 - alpha) * x;
      if (m > 0) {
        const Vector z_relaxed = alpha * (C * x_tilde) + (1.0 - alpha) * z;
        const Vector z_next =
            (z_relaxed + y.cwiseQuotient(rho_vec)).cwiseMax(lower).cwiseMin(upper);
        y += rho_vec.cwiseProduct(z_relaxed - z_next);
        z = z_next;
      }
      if (!x.allFinite() || !y.allFinite()) {
        throw SolverError("ADMM produced a non-finite iterate");
      }
      has_state = true;

      if (iter % settings.check_interval != 0 && iter != settings.max_iter) continue;

      out.iterations = iter;
      const Vector Cx = m > 0 ? Vector(C * x) : Vector();
      const Vector Qx = qp.Q * x;
      const Vector Cty = m > 0 ? Vector(C.transpose() * y) : Vector::Zero(static_cast<Eigen::Index>(n));
      const double r_prim = m > 0 ? inf_norm(Cx - z) : 0.0;
      const double r_dual = inf_norm(Qx + qp.q + Cty);
      const double eps_prim =
          settings.eps_abs + settings.eps_rel * std::max(inf_norm(Cx), inf_norm(z));
      const double eps_dual =
          settings.eps_abs +
          settings.eps_rel * std::max({inf_norm(Qx), inf_norm(Cty), inf_norm(qp.q)});

      if (try_polish(out)) return out;

      if (r_prim <= eps_prim && r_dual <= eps_dual &&
          residuals_of(x, y).max() <= settings.eps_abs) {
        out.status = QpStatus::optimal;
        return finish(out, x, y);
      }

      if (m > 0 && iter >= kMinItersForInfeasibility) {
        if (infeasibility_certificate(y - y_check)) {
          out.status = QpStatus::infeasible;
          return finish(out, x, y);
        }
      }
      y_check = y;

      if (settings.adaptive_rho && m > 0 && iter % kRhoUpdateInterval == 0) {
        const double p_scale = std::max({inf_norm(Cx), inf_norm(z), 1e-30});
        const double d_scale = std::max({inf_norm(Qx), inf_norm(Cty), inf_norm(qp.q), 1e-30});
        const double ratio = std::sqrt((r_prim / p_scale) / std::max(r_dual / d_scale, 1e-30));
        const double proposed = std::clamp(rho * ratio, kRhoMin, kRhoMax);
        if (proposed > 5.0 * rho || proposed < 0.2 * rho) set_rho(proposed);
      }
    }
    out.status = QpStatus::max_iter;
    out.iterations = settings.max_iter;
    return finish(out, x, y);
  }
};

QpSolver::QpSolver(QpProblem qp, QpSettings settings) : impl_(std::make_unique<Impl>()) {
  qp.validate();
  impl_->qp = std::move(qp);
  impl_->settings = settings;
  impl_->n = impl_->qp.n();
  impl_->m_eq = impl_->qp.m_eq();
  impl_->m = impl_->m_eq + impl_->qp.m_ineq();
  impl_->C.resize(static_cast<Eigen::Index>(impl_->m), static_cast<Eigen::Index>(impl_->n));
  if (impl_->m_eq > 0) impl_->C.topRows(static_cast<Eigen::Index>(impl_->m_eq)) = impl_->qp.A;
  if (impl_->qp.m_ineq() > 0) {
    impl_->C.bottomRows(static_cast<Eigen::Index>(impl_->qp.m_ineq())) = impl_->qp.G;
  }
  impl_->build_bounds();
  impl_->set_rho(settings.rho);
  impl_->cold_start();
}

QpSolver::~QpSolver() = default;
QpSolver::QpSolver(QpSolver&&) noexcept = default;
QpSolver& QpSolver::operator=(QpSolver&&) noexcept = default;

const QpProblem& QpSolver::problem() const { return impl_->qp; }
const QpSettings& QpSolver::settings() const { return impl_->settings; }

void QpSolver::set_linear_term(const Vector& q) {
  LTOF_REQUIRE(q.size() == impl_->qp.q.size(), "linear term length mismatch");
  impl_->qp.q = q;
  impl_->last_failed_active.clear();
}

void QpSolver::set_rhs(const Vector& b, const Vector& h) {
  LTOF_REQUIRE(b.size() == impl_->qp.b.size() && h.size() == impl_->qp.h.size(),
               "right-hand side length mismatch");
  impl_->qp.b = b;
  impl_->qp.h = h;
  impl_->build_bounds();
  impl_->last_failed_active.clear();
}

void QpSolver::reset() {
  impl_->cold_start();
  if (impl_->rho != impl_->settings.rho) impl_->set_rho(impl_->settings.rho);
}

QpSolution QpSolver::solve() { return impl_->run(); }

QpSolution solve_qp(const QpProblem& qp, double tol, std::size_t max_iter) {
  QpSettings settings;
  settings.eps_abs = tol;
  settings.eps_rel = tol;
  settings.max_iter = max_iter;
  QpSolver solver(qp, settings);
  return solver.solve();
}

}  // namespace ltof::qp
