#pragma once

#include "ltof/core/types.hpp"
#include "ltof/qp/qp.hpp"

namespace ltof::qp {

/// Euclidean projection onto {x >= 0, 1'x = 1} by the sort-and-threshold method.
Vector project_simplex(const Vector& v);

/// Euclidean projection onto {Ax = b, Gx <= h}.
/// Throws SolverError when the polyhedron is empty or the solver stalls.
Vector project_polyhedron(const Vector& v, const Matrix& A, const Vector& b, const Matrix& G,
                          const Vector& h, double tol = 1e-10);

/// Repeated projections onto one fixed polyhedron. The solver factorization is
/// built once and each call warm-starts from the previous projection, which
/// suits iterative schemes that project nearby points in sequence.
class PolyhedronProjector {
 public:
  PolyhedronProjector(const Matrix& A, const Vector& b, const Matrix& G, const Vector& h,
                      double tol = 1e-10);

  Vector project(const Vector& v);
  /// Drops the warm-start state.
  void reset() { solver_.reset(); }

 private:
  QpSolver solver_;
};

}  // namespace ltof::qp
