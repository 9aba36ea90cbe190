#pragma once

#include "ltof/core/types.hpp"
#include "ltof/problems/problem.hpp"
#include "ltof/qp/projection.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace ltof::restore {

inline constexpr double kRestoreTolerance = 1e-6;

struct RestorationResult {
  Vector x;
  std::size_t iterations = 0;
  double ineq_violation = 0.0;  // max_i [g_i]_+
  double eq_violation = 0.0;    // max_i |h_i|
  bool converged = false;       // both violations <= tolerance
  double seconds = 0.0;
};

/// [x]_+ / sum([x]_+); the uniform vector when no entry is positive.
Vector clip_normalize_simplex(const Vector& x_hat);

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

struct NewtonSettings {
  double tol = kRestoreTolerance;
  std::size_t max_iter = 50;
  double damping = 1e-10;  // added to the normal matrix when it is ill-conditioned
};

/// Gauss-Newton iteration on f(x) = 0: each step is the least-squares (or,
/// for fewer residuals than unknowns, minimum-norm) solution of J dx = -f,
/// computed from the normal equations. Stops once every |f_i| < tol.
/// Without convergence the iterate with the smallest max |f_i| is returned.
RestorationResult newton_restore(const ResidualFn& residual, const JacobianFn& jacobian,
                                 const Vector& x0, const NewtonSettings& settings = {});

/// Newton restoration of f = [ReLU(g(x, zeta)); h(x, zeta)].
RestorationResult newton_restore(const problems::ParametricProblem& problem, const Vector& x0,
                                 const Vector& zeta, const NewtonSettings& settings = {});

/// Applies a problem's declared restoration policy. Holds a warm-started
/// projector for polyhedral problems, so one instance must not be shared
/// between threads.
class Restorer {
 public:
  explicit Restorer(std::shared_ptr<const problems::ParametricProblem> problem);

  RestorationResult restore(const Vector& x_hat, const Vector& zeta);

  const problems::ParametricProblem& problem() const { return *problem_; }

 private:
  std::shared_ptr<const problems::ParametricProblem> problem_;
  std::optional<qp::PolyhedronProjector> projector_;
};

/// One-shot dispatch: simplex -> clip-normalize, polyhedron -> projection,
/// general smooth constraints -> Newton.
RestorationResult restore_for(std::shared_ptr<const problems::ParametricProblem> problem,
                              const Vector& x_hat, const Vector& zeta);

}  // namespace ltof::restore
