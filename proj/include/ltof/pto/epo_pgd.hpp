#pragma once

#include "ltof/problems/nonconvex_qp.hpp"
#include "ltof/pto/predictor.hpp"

namespace ltof::pto {

/// Orthogonal projector onto the null space of the equality rows and the
/// inequality rows active at x (slack <= kActivityTolerance).
Matrix active_null_projector(const problems::LinearConstraints& lin, const Vector& x);

/// Vector-Jacobian product v' dx/dzeta at a PGD fixed point
/// x = P(x - step * grad f(x, zeta)), with P linearized on the active set at x.
/// Solves (I - P_N (I - step H))' w = v and returns -step * cos(x) .* (P_N w).
/// Throws DegenerateSystem when that system is numerically singular.
Vector pgd_fixed_point_vjp(const problems::NonconvexQpProblem& problem, const Vector& zeta,
                           const Vector& x, double step, const Vector& v);

/// Decision loss f(x(zeta_hat), zeta) at the PGD fixed point reached from
/// `start` (updated to that fixed point), with its gradient in zeta_hat when
/// `grad` is non-null. Throws SolverError when PGD does not reach the
/// fixed-point tolerance and DegenerateSystem when the system is singular.
double epo_pgd_sample_loss(const problems::NonconvexQpProblem& problem, const Vector& zeta_hat,
                           const Vector& zeta, Vector& start, qp::PolyhedronProjector& projector,
                           const problems::PgdSettings& settings, Vector* grad);

/// End-to-end training of the predictor through the PGD fixed point. Each
/// training sample warm-starts from its previous fixed point.
PredictorModel epo_pgd_train_lr(const data::Dataset& dataset, const PtoConfig& config, double lr);
PredictorModel epo_pgd_train(const data::Dataset& dataset, const PtoConfig& config);

}  // namespace ltof::pto
