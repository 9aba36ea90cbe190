#pragma once

#include "ltof/core/types.hpp"
#include "ltof/qp/qp.hpp"

namespace ltof::qp {

/// Inequality rows with slack h_i - G_i x at or below this are treated as active.
inline constexpr double kActivityTolerance = 1e-7;

/// Indices of the active inequality rows at `x`.
IndexList active_inequalities(const QpProblem& qp, const Vector& x,
                              double tol = kActivityTolerance);

/// Gradient of a scalar loss with respect to the linear term q, given the
/// loss gradient with respect to the optimal x.
///
/// Solves the transposed KKT system restricted to the equality rows and the
/// active inequality rows. Throws DegenerateSystem when that system is
/// numerically singular (reciprocal condition estimate below 1e-12).
Vector qp_backward(const QpProblem& qp, const QpSolution& sol, const Vector& dl_dx);

}  // namespace ltof::qp
