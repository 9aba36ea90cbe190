#pragma once

#include "ltof/problems/problem.hpp"
#include "ltof/qp/qp.hpp"

namespace ltof::problems {

/// Mean-variance allocation in minimization form:
///   min_x  risk_weight * x' Sigma x - zeta' x   s.t.  x >= 0,  1'x = 1.
class PortfolioProblem final : public ParametricProblem {
 public:
  static constexpr double kDefaultRiskWeight = 2.0;

  explicit PortfolioProblem(Matrix sigma, double risk_weight = kDefaultRiskWeight);

  std::string tag() const override { return "portfolio"; }
  std::size_t n_decision() const override { return dim_; }
  std::size_t n_param() const override { return dim_; }
  std::size_t m_ineq() const override { return dim_; }
  std::size_t m_eq() const override { return 1; }

  double objective(const Vector& x, const Vector& zeta) const override;
  Vector grad_x_objective(const Vector& x, const Vector& zeta) const override;
  Vector grad_zeta_objective(const Vector& x, const Vector& zeta) const override;
  Vector ineq_residuals(const Vector& x, const Vector& zeta) const override;
  Vector eq_residuals(const Vector& x, const Vector& zeta) const override;
  Matrix ineq_jacobian(const Vector& x, const Vector& zeta) const override;
  Matrix eq_jacobian(const Vector& x, const Vector& zeta) const override;
  Vector ground_truth(const Vector& zeta) const override;
  RestorationPolicy restoration_policy() const override {
    return RestorationPolicy::clip_normalize;
  }
  const LinearConstraints* linear_constraints() const override { return &constraints_; }
  nlohmann::json to_json() const override;

  const Matrix& sigma() const { return sigma_; }
  double risk_weight() const { return risk_weight_; }

  /// The QP with Q = 2 risk_weight Sigma and q = -zeta.
  qp::QpProblem to_qp(const Vector& zeta) const;

 private:
  std::size_t dim_;
  Matrix sigma_;
  double risk_weight_;
  LinearConstraints constraints_;
};

}  // namespace ltof::problems
