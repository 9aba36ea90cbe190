#pragma once

#include "ltof/core/types.hpp"
#include "ltof/problems/nonconvex_qp.hpp"
#include "ltof/qp/projection.hpp"

#include <cstddef>

namespace ltof::problems {

inline constexpr double kFixedPointTolerance = 1e-7;

struct PgdSettings {
  /// Step size; a nonpositive value selects 1 / lipschitz_bound(zeta).
  double step = 0.0;
  std::size_t max_iter = 5000;
  double tol = kFixedPointTolerance;
};

struct PgdResult {
  Vector x;
  double step = 0.0;
  double residual = 0.0;  // |x - proj(x - step * grad)|_2 at the returned x
  std::size_t iterations = 0;
  bool converged = false;
};

/// Step size actually used for `settings` at parameter `zeta`.
double pgd_step(const NonconvexQpProblem& problem, const Vector& zeta, const PgdSettings& settings);

/// Projected gradient descent x <- proj(x - step * grad f(x, zeta)) from x0.
/// The returned iterate is always the output of a projection.
/// Throws SolverError if an iterate becomes non-finite.
PgdResult pgd_solve(const NonconvexQpProblem& problem, const Vector& zeta, const Vector& x0,
                    const PgdSettings& settings = {});

/// Same, reusing a caller-owned projector onto the problem's feasible set.
PgdResult pgd_solve(const NonconvexQpProblem& problem, const Vector& zeta, const Vector& x0,
                    qp::PolyhedronProjector& projector, const PgdSettings& settings = {});

/// Deterministic starting points: the canonical start followed by
/// `restarts - 1` projections of uniform draws on [-2 pi, 2 pi]^n seeded by the
/// problem's restart seed.
std::vector<Vector> pgd_starts(const NonconvexQpProblem& problem, std::size_t restarts);

/// Best-objective PGD fixed point over `restarts` starting points.
/// Throws SolverError if every restart fails.
PgdResult nonconvex_ground_truth(const NonconvexQpProblem& problem, const Vector& zeta,
                                 std::size_t restarts, const PgdSettings& settings = {});

}  // namespace ltof::problems
