#pragma once

#include "ltof/problems/problem.hpp"

#include <cstdint>

namespace ltof::problems {

/// min_x  1/2 x' diag(mu) x + zeta' sin(x)   s.t.  Ax = b,  Gx <= h.
///
/// The ground truth is the best projected-gradient fixed point over a fixed
/// family of starting points (see nonconvex_ground_truth), so regret is
/// measured against a best-found solution and may be negative.
class NonconvexQpProblem final : public ParametricProblem {
 public:
  static constexpr std::size_t kDefaultRestarts = 16;

  NonconvexQpProblem(Vector mu, Matrix A, Vector b, Matrix G, Vector h,
                     std::size_t restarts = kDefaultRestarts, std::uint64_t restart_seed = 0);

  std::string tag() const override { return "nonconvex_qp"; }
  std::size_t n_decision() const override { return static_cast<std::size_t>(mu_.size()); }
  std::size_t n_param() const override { return static_cast<std::size_t>(mu_.size()); }
  std::size_t m_ineq() const override { return static_cast<std::size_t>(lin_.G.rows()); }
  std::size_t m_eq() const override { return static_cast<std::size_t>(lin_.A.rows()); }

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

  const Vector& mu() const { return mu_; }
  std::size_t restarts() const { return restarts_; }
  std::uint64_t restart_seed() const { return restart_seed_; }

  /// Diagonal of the Hessian in x: mu - zeta * sin(x).
  Vector hessian_diagonal(const Vector& x, const Vector& zeta) const;
  /// Upper bound on the Hessian spectral radius over all x: max_i mu_i + |zeta_i|.
  double lipschitz_bound(const Vector& zeta) const;
  /// Minimum-norm solution of Ax = b; feasible by construction of h.
  const Vector& canonical_start() const { return canonical_start_; }

 private:
  Vector mu_;
  LinearConstraints lin_;
  std::size_t restarts_;
  std::uint64_t restart_seed_;
  Vector canonical_start_;
};

}  // namespace ltof::problems
