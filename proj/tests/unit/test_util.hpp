#pragma once

#include "ltof/core/rng.hpp"
#include "ltof/core/types.hpp"
#include "ltof/qp/qp.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace ltof::test {

/// Central differences of a scalar function at x.
inline Vector central_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                               double h = 1e-6) {
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// |a - b|_inf / max(|b|_inf, floor).
inline double rel_error(const Vector& a, const Vector& b, double floor = 1e-2) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), floor);
}

inline Vector random_vector(Rng& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

inline Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

/// Random convex QP with a known interior-or-boundary feasible point.
inline qp::QpProblem random_qp(Rng& rng, Eigen::Index n, Eigen::Index me, Eigen::Index mi, bool singular) {
  Matrix L = random_matrix(rng, n, singular ? std::max<Eigen::Index>(1, n / 2) : n);
  Matrix Q = L * L.transpose();
  if (!singular) Q.diagonal().array() += 0.1;
  Q = 0.5 * (Q + Q.transpose());
  const Vector x0 = random_vector(rng, n);
  qp::QpProblem qp;
  qp.Q = Q;
  qp.q = random_vector(rng, n, -3.0, 3.0);
  qp.A = random_matrix(rng, me, n);
  qp.b = qp.A * x0;
  qp.G = random_matrix(rng, mi, n);
  qp.h = qp.G * x0 + random_vector(rng, mi, 0.0, 1.0);
  if (singular) {
    // Bound the recession directions of a singular objective.
    const Eigen::Index nb = 2 * n;
    Matrix G(mi + nb, n);
    Vector h(mi + nb);
    G.topRows(mi) = qp.G;
    h.head(mi) = qp.h;
    G.block(mi, 0, n, n) = Matrix::Identity(n, n);
    G.block(mi + n, 0, n, n) = -Matrix::Identity(n, n);
    h.segment(mi, n) = x0.array() + 2.0;
    h.segment(mi + n, n) = 2.0 - x0.array();
    qp.G = G;
    qp.h = h;
  }
  return qp;
}

/// Minimum objective over every KKT point of an equality-constrained
/// subproblem with a chosen active set: the optimum of a convex QP is the
/// best feasible, dual-feasible such point.
inline double active_set_oracle(const qp::QpProblem& qp) {
  const Eigen::Index n = qp.Q.rows();
  const Eigen::Index me = qp.A.rows();
  const Eigen::Index mi = qp.G.rows();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << mi); ++mask) {
    std::vector<Eigen::Index> act;
    for (Eigen::Index i = 0; i < mi; ++i)
      if (mask >> i & 1) act.push_back(i);
    const Eigen::Index m = me + static_cast<Eigen::Index>(act.size());
    Matrix K = Matrix::Zero(n + m, n + m);
    Vector rhs(n + m);
    K.topLeftCorner(n, n) = qp.Q;
    rhs.head(n) = -qp.q;
    for (Eigen::Index r = 0; r < m; ++r) {
      const Vector row = r < me ? Vector(qp.A.row(r).transpose()) : Vector(qp.G.row(act[r - me]).transpose());
      K.block(0, n + r, n, 1) = row;
      K.block(n + r, 0, 1, n) = row.transpose();
      rhs[n + r] = r < me ? qp.b[r] : qp.h[act[r - me]];
    }
    Eigen::FullPivLU<Matrix> lu(K);
    if (lu.rank() < n + m) continue;
    const Vector sol = lu.solve(rhs);
    const Vector x = sol.head(n);
    if (mi > 0 && (qp.G * x - qp.h).maxCoeff() > 1e-9) continue;
    bool dual_ok = true;
    for (std::size_t a = 0; a < act.size(); ++a)
      dual_ok = dual_ok && sol[n + me + static_cast<Eigen::Index>(a)] >= -1e-9;
    if (!dual_ok) continue;
    best = std::min(best, qp.objective(x));
  }
  return best;
}

}  // namespace ltof::test
