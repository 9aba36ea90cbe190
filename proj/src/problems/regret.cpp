#include "ltof/problems/regret.hpp"

#include "ltof/core/error.hpp"

#include <cmath>

namespace ltof::problems {

namespace {
constexpr double kMinOptimalMagnitude = 1e-12;
}

RegretResult regret(const ParametricProblem& problem, const Vector& x_hat, const Vector& zeta,
                    const Vector& x_star, double feasibility_tol) {
  LTOF_REQUIRE(static_cast<std::size_t>(x_hat.size()) == problem.n_decision() &&
                   x_star.size() == x_hat.size(),
               "decision length mismatch");
  RegretResult out;
  const double f_star = problem.objective(x_star, zeta);
  out.regret = problem.objective(x_hat, zeta) - f_star;
  if (std::abs(f_star) > kMinOptimalMagnitude) out.percent = 100.0 * out.regret / std::abs(f_star);
  out.violation = violation(problem, x_hat, zeta);
  out.feasible = out.violation.max() <= feasibility_tol;
  return out;
}

RegretResult regret(const ParametricProblem& problem, const Vector& x_hat, const Vector& zeta) {
  return regret(problem, x_hat, zeta, problem.ground_truth(zeta));
}

}  // namespace ltof::problems
