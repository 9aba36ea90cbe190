#pragma once

#include "ltof/problems/problem.hpp"
#include "ltof/qp/qp.hpp"

namespace ltof::problems {

/// min_x  zeta_1 x_1^2 + zeta_2 x_2^2
/// s.t.   x_1 + 2 x_2 <= 0.5,  2 x_1 - x_2 <= 0.2,  x_1 + x_2 <= 0.3.
/// Convex whenever zeta > 0.
class Toy2dProblem final : public ParametricProblem {
 public:
  Toy2dProblem();

  std::string tag() const override { return "toy2d"; }
  std::size_t n_decision() const override { return 2; }
  std::size_t n_param() const override { return 2; }
  std::size_t m_ineq() const override { return 3; }
  std::size_t m_eq() const override { return 0; }

  double objective(const Vector& x, const Vector& zeta) const override;
  Vector grad_x_objective(const Vector& x, const Vector& zeta) const override;
  Vector grad_zeta_objective(const Vector& x, const Vector& zeta) const override;
  Vector ineq_residuals(const Vector& x, const Vector& zeta) const override;
  Vector eq_residuals(const Vector& x, const Vector& zeta) const override;
  Matrix ineq_jacobian(const Vector& x, const Vector& zeta) const override;
  Matrix eq_jacobian(const Vector& x, const Vector& zeta) const override;
  Vector ground_truth(const Vector& zeta) const override;
  RestorationPolicy restoration_policy() const override { return RestorationPolicy::projection; }
  const LinearConstraints* linear_constraints() const override { return &lin_; }
  nlohmann::json to_json() const override;

  qp::QpProblem to_qp(const Vector& zeta) const;

 private:
  LinearConstraints lin_;
};

}  // namespace ltof::problems
