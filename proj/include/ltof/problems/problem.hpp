#pragma once

#include "ltof/core/types.hpp"

#include <json.hpp>

#include <memory>
#include <string>

namespace ltof::problems {

enum class RestorationPolicy { clip_normalize, projection, newton };

std::string to_string(RestorationPolicy policy);

/// Parameter-independent linear constraints Ax = b, Gx <= h.
struct LinearConstraints {
  Matrix A;
  Vector b;
  Matrix G;
  Vector h;
};

/// min_x f(x, zeta)  s.t.  g(x, zeta) <= 0,  h(x, zeta) = 0.
///
/// Instances are immutable after construction and safe to share across
/// threads; solvers that need scratch state build it per call.
class ParametricProblem {
 public:
  virtual ~ParametricProblem() = default;

  virtual std::string tag() const = 0;
  virtual std::size_t n_decision() const = 0;
  virtual std::size_t n_param() const = 0;
  virtual std::size_t m_ineq() const = 0;
  virtual std::size_t m_eq() const = 0;

  virtual double objective(const Vector& x, const Vector& zeta) const = 0;
  virtual Vector grad_x_objective(const Vector& x, const Vector& zeta) const = 0;
  virtual Vector grad_zeta_objective(const Vector& x, const Vector& zeta) const = 0;

  virtual Vector ineq_residuals(const Vector& x, const Vector& zeta) const = 0;
  virtual Vector eq_residuals(const Vector& x, const Vector& zeta) const = 0;
  /// Jacobians are m x n.
  virtual Matrix ineq_jacobian(const Vector& x, const Vector& zeta) const = 0;
  virtual Matrix eq_jacobian(const Vector& x, const Vector& zeta) const = 0;

  /// Certified optimal (or best-found, for nonconvex problems) solution.
  virtual Vector ground_truth(const Vector& zeta) const = 0;

  virtual RestorationPolicy restoration_policy() const = 0;
  /// Non-null when every constraint is linear in x and independent of zeta.
  virtual const LinearConstraints* linear_constraints() const { return nullptr; }

  virtual nlohmann::json to_json() const = 0;
};

/// Constraint violation measured in infinity norms.
struct Violation {
  double ineq = 0.0;  // max_i [g_i]_+
  double eq = 0.0;    // max_i |h_i|
  double max() const { return ineq > eq ? ineq : eq; }
};

Violation violation(const ParametricProblem& problem, const Vector& x, const Vector& zeta);

/// Rebuilds a problem from its `to_json` document; dispatches on the "tag" field.
std::shared_ptr<const ParametricProblem> problem_from_json(const nlohmann::json& j);

}  // namespace ltof::problems
