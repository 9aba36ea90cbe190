#include "ltof/qp/projection.hpp"

#include "ltof/core/error.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace ltof::qp {

namespace {

QpSettings projection_settings(double tol) {
  QpSettings s;
  s.eps_abs = tol;
  s.eps_rel = tol;
  s.rho = 1.0;
  return s;
}

QpProblem projection_problem(const Matrix& A, const Vector& b, const Matrix& G, const Vector& h) {
  const auto n = std::max(A.cols(), G.cols());
  return QpProblem{2.0 * Matrix::Identity(n, n), Vector::Zero(n), A, b, G, h};
}

}  // namespace

Vector project_simplex(const Vector& v) {
  LTOF_REQUIRE(v.size() > 0 && v.allFinite(), "input must be finite and nonempty");
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

Vector project_polyhedron(const Vector& v, const Matrix& A, const Vector& b, const Matrix& G,
                          const Vector& h, double tol) {
  PolyhedronProjector projector(A, b, G, h, tol);
  return projector.project(v);
}

PolyhedronProjector::PolyhedronProjector(const Matrix& A, const Vector& b, const Matrix& G,
                                         const Vector& h, double tol)
    : solver_(projection_problem(A, b, G, h), projection_settings(tol)) {}

Vector PolyhedronProjector::project(const Vector& v) {
  LTOF_REQUIRE(static_cast<std::size_t>(v.size()) == solver_.problem().n(),
               "point dimension does not match the polyhedron");
  solver_.set_linear_term(-2.0 * v);
  QpSolution sol = solver_.solve();
  if (sol.status == QpStatus::infeasible) {
    throw SolverError("projection onto an empty polyhedron");
  }
  if (sol.status != QpStatus::optimal) {
    // A stale warm start can slow ADMM badly; retry once from scratch.
    solver_.reset();
    sol = solver_.solve();
    if (sol.status != QpStatus::optimal) {
      throw SolverError("projection did not converge (status " + to_string(sol.status) + ")");
    }
  }
  return sol.x;
}

}  // namespace ltof::qp
