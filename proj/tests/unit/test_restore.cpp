#include "ltof/core/error.hpp"
#include "ltof/data/nonconvex_data.hpp"
#include "ltof/problems/portfolio.hpp"
#include "ltof/problems/toy2d.hpp"
#include "ltof/qp/projection.hpp"
#include "ltof/restore/restore.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace ltof;
using namespace ltof::restore;

TEST_CASE("clip-normalize worked examples") {
  Vector x(3);
  x << 0.2, -0.1, 0.3;
  const Vector r = clip_normalize_simplex(x);
  CHECK(r[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(r[1] == 0.0);
  CHECK(r[2] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(clip_normalize_simplex(-Vector::Ones(4)) == Vector::Constant(4, 0.25));
  Vector bad = Vector::Ones(2);
  bad[1] = std::nan("");
  CHECK_THROWS_AS(clip_normalize_simplex(bad), ContractViolation);
}

TEST_CASE("clip-normalize lands exactly on the simplex and is idempotent") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Vector r = clip_normalize_simplex(test::random_vector(rng, 10, -1.0, 2.0));
    CHECK(std::abs(r.sum() - 1.0) <= 1e-12);
    CHECK(r.minCoeff() >= 0.0);
    CHECK((clip_normalize_simplex(r) - r).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("Newton on an affine map converges in one iteration") {
  Matrix A(2, 2);
  A << 3.0, 1.0, 1.0, 2.0;
  Vector b(2);
  b << 1.0, -1.0;
  const RestorationResult r = newton_restore([&](const Vector& x) { return Vector(A * x - b); },
                                             [&](const Vector&) { return A; }, Vector::Zero(2));
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK((A * r.x - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("scalar Newton finds the square root of 4 from 3") {
  const RestorationResult r = newton_restore(
      [](const Vector& x) { return Vector::Constant(1, x[0] * x[0] - 4.0); },
      [](const Vector& x) { return Matrix::Constant(1, 1, 2.0 * x[0]); }, Vector::Constant(1, 3.0));
  CHECK(r.converged);
  CHECK(r.iterations <= 5);
  CHECK(std::abs(r.x[0] - 2.0) < 1e-6);
}

TEST_CASE("Newton without convergence returns the best iterate unconverged") {
  NewtonSettings s;
  s.max_iter = 3;
  // x^2 + 1 = 0 has no real root.
  const RestorationResult r = newton_restore(
      [](const Vector& x) { return Vector::Constant(1, x[0] * x[0] + 1.0); },
      [](const Vector& x) { return Matrix::Constant(1, 1, 2.0 * x[0]); }, Vector::Constant(1, 0.5), s);
  CHECK_FALSE(r.converged);
  CHECK(r.x[0] * r.x[0] + 1.0 <= 0.5 * 0.5 + 1.0);
}

TEST_CASE("rank-deficient Jacobians are regularized rather than fatal") {
  const RestorationResult r = newton_restore(
      [](const Vector& x) { return Vector::Constant(2, x[0] + x[1] - 1.0); },
      [](const Vector&) { return Matrix::Ones(2, 2); }, Vector::Zero(2));
  CHECK(r.converged);
  CHECK(std::abs(r.x.sum() - 1.0) < 1e-6);
}

TEST_CASE("Newton restores perturbed feasible nonconvex points") {
  const auto p = data::gen_nonconvex_problem({20, 10, 10}, 0);
  const auto& lin = *p->linear_constraints();
  Rng rng(3);
  int converged = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector feasible = qp::project_polyhedron(test::random_vector(rng, 20, -2.0, 2.0), lin.A,
                                                   lin.b, lin.G, lin.h);
    const Vector x0 = feasible + 1e-2 * test::random_vector(rng, 20);
    const RestorationResult r = newton_restore(*p, x0, Vector::Zero(20));
    const Vector g = lin.G * r.x - lin.h;
    const Vector h = lin.A * r.x - lin.b;
    const bool ok = r.converged && r.iterations <= 50 && g.maxCoeff() < 1e-6 &&
                    h.cwiseAbs().maxCoeff() < 1e-6;
    converged += ok ? 1 : 0;
  }
  CHECK(converged >= 95);
}

TEST_CASE("restore_for dispatches on the declared policy and records timing") {
  Rng rng(4);
  const Matrix L = test::random_matrix(rng, 4, 4);
  auto port = std::make_shared<problems::PortfolioProblem>(L * L.transpose());
  const Vector zeta = test::random_vector(rng, 4);
  const RestorationResult a = restore_for(port, test::random_vector(rng, 4), zeta);
  CHECK(std::abs(a.x.sum() - 1.0) <= 1e-12);
  CHECK(a.converged);
  CHECK(a.seconds >= 0.0);

  auto toy = std::make_shared<problems::Toy2dProblem>();
  Vector far(2);
  far << 3.0, 3.0;
  const RestorationResult b = restore_for(toy, far, Vector::Ones(2));
  CHECK(b.converged);
  CHECK(problems::violation(*toy, b.x, Vector::Ones(2)).max() <= kRestoreTolerance);

  // Feasible inputs are fixed points of every policy.
  Vector inside(2);
  inside << -0.2, -0.1;
  CHECK((restore_for(toy, inside, Vector::Ones(2)).x - inside).cwiseAbs().maxCoeff() < 1e-7);
  const Vector on_simplex = clip_normalize_simplex(test::random_vector(rng, 4, 0.0, 1.0));
  CHECK((restore_for(port, on_simplex, zeta).x - on_simplex).cwiseAbs().maxCoeff() < 1e-15);

  auto nc = data::gen_nonconvex_problem({8, 4, 4}, 1);
  Restorer restorer(nc);
  const RestorationResult c = restorer.restore(Vector::Constant(8, 5.0), Vector::Ones(8));
  CHECK(c.converged);
  CHECK(c.ineq_violation <= kRestoreTolerance);
  CHECK(c.eq_violation <= kRestoreTolerance);
}
