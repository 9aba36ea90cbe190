#include "ltof/problems/pgd.hpp"

#include "ltof/core/error.hpp"
#include "ltof/core/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace ltof::problems {

namespace {

qp::PolyhedronProjector make_projector(const NonconvexQpProblem& problem) {
  const LinearConstraints& lin = *problem.linear_constraints();
  return qp::PolyhedronProjector(lin.A, lin.b, lin.G, lin.h);
}

}  // namespace

double pgd_step(const NonconvexQpProblem& problem, const Vector& zeta,
                const PgdSettings& settings) {
  if (settings.step > 0.0) return settings.step;
  return 1.0 / std::max(problem.lipschitz_bound(zeta), 1e-12);
}

PgdResult pgd_solve(const NonconvexQpProblem& problem, const Vector& zeta, const Vector& x0,
                    const PgdSettings& settings) {
  qp::PolyhedronProjector projector = make_projector(problem);
  return pgd_solve(problem, zeta, x0, projector, settings);
}

PgdResult pgd_solve(const NonconvexQpProblem& problem, const Vector& zeta, const Vector& x0,
                    qp::PolyhedronProjector& projector, const PgdSettings& settings) {
  LTOF_REQUIRE(static_cast<std::size_t>(x0.size()) == problem.n_decision(),
               "start point length mismatch");
  LTOF_REQUIRE(static_cast<std::size_t>(zeta.size()) == problem.n_param(),
               "zeta length mismatch");
  PgdResult result;
  result.step = pgd_step(problem, zeta, settings);
  Vector x = projector.project(x0);
  for (std::size_t iter = 0; iter < settings.max_iter; ++iter) {
    const Vector next = projector.project(x - result.step * problem.grad_x_objective(x, zeta));
    if (!next.allFinite()) throw SolverError("projected gradient iterate is not finite");
    result.residual = (next - x).norm();
    result.iterations = iter + 1;
    if (result.residual <= settings.tol) {
      result.x = std::move(x);
      result.converged = true;
      return result;
    }
    x = next;
  }
  result.x = std::move(x);
  return result;
}

std::vector<Vector> pgd_starts(const NonconvexQpProblem& problem, std::size_t restarts) {
  LTOF_REQUIRE(restarts >= 1, "at least one restart is required");
  std::vector<Vector> starts{problem.canonical_start()};
  Rng rng(problem.restart_seed());
  const auto n = static_cast<Eigen::Index>(problem.n_decision());
  const double span = 2.0 * std::numbers::pi;
  for (std::size_t r = 1; r < restarts; ++r) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(-span, span);
    starts.push_back(std::move(v));
  }
  return starts;
}

PgdResult nonconvex_ground_truth(const NonconvexQpProblem& problem, const Vector& zeta,
                                 std::size_t restarts, const PgdSettings& settings) {
  qp::PolyhedronProjector projector = make_projector(problem);
  PgdResult best;
  double best_value = std::numeric_limits<double>::infinity();
  for (const Vector& start : pgd_starts(problem, restarts)) {
    PgdResult candidate;
    try {
      candidate = pgd_solve(problem, zeta, start, projector, settings);
    } catch (const SolverError&) {
      projector.reset();
      continue;
    }
    const double value = problem.objective(candidate.x, zeta);
    if (value < best_value) {
      best_value = value;
      best = std::move(candidate);
    }
  }
  if (!std::isfinite(best_value)) throw SolverError("every projected gradient restart failed");
  return best;
}

}  // namespace ltof::problems
