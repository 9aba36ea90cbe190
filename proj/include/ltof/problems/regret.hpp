#pragma once

#include "ltof/core/types.hpp"
#include "ltof/problems/problem.hpp"

#include <limits>

namespace ltof::problems {

/// Violation above this (infinity norm) marks a decision as infeasible.
inline constexpr double kFeasibilityTolerance = 1e-6;

struct RegretResult {
  double regret = 0.0;   // f(x_hat) - f(x_star)
  /// 100 * regret / |f(x_star)|; NaN when f(x_star) is zero.
  double percent = std::numeric_limits<double>::quiet_NaN();
  Violation violation;
  bool feasible = true;
};

/// Regret of `x_hat` against a precomputed optimum `x_star`. Feasibility is
/// reported alongside and never folded into the regret value.
RegretResult regret(const ParametricProblem& problem, const Vector& x_hat, const Vector& zeta,
                    const Vector& x_star, double feasibility_tol = kFeasibilityTolerance);

/// Same, solving for the optimum with the problem's ground-truth solver.
RegretResult regret(const ParametricProblem& problem, const Vector& x_hat, const Vector& zeta);

}  // namespace ltof::problems
