#include "ltof/core/error.hpp"
#include "ltof/qp/projection.hpp"
#include "ltof/qp/qp.hpp"
#include "ltof/qp/qp_backward.hpp"
#include "test_util.hpp"

#include <doctest.h>


using namespace ltof;
using namespace ltof::qp;


TEST_CASE("solve_qp is certified by KKT residuals and the active-set oracle") {
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const bool large = trial % 4 == 0;
    const Eigen::Index n = large ? 10 + trial % 21 : 2 + trial % 6;
    const Eigen::Index me = trial % 3;
    const Eigen::Index mi = large ? 4 : 1 + trial % 7;
    const QpProblem qp = test::random_qp(rng, n, me, mi, false);
    const QpSolution sol = solve_qp(qp);
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK(kkt_residuals(qp, sol.x, sol.dual_eq, sol.dual_ineq).max() <= 1e-6);
    const double oracle = test::active_set_oracle(qp);
    CHECK(std::abs(qp.objective(sol.x) - oracle) <= 1e-4 * std::max(1.0, std::abs(oracle)));
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("singular positive semidefinite objectives are solved to KKT tolerance") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const QpProblem qp = test::random_qp(rng, 3 + trial % 10, trial % 2, 3, true);
    const QpSolution sol = solve_qp(qp);
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK(kkt_residuals(qp, sol.x, sol.dual_eq, sol.dual_ineq).max() <= 1e-6);
  }
}

TEST_CASE("primal infeasibility is detected") {
  QpProblem qp = unconstrained(Matrix::Identity(1, 1), Vector::Zero(1));
  qp.G = Matrix(2, 1);
  qp.G << 1.0, -1.0;
  qp.h = Vector(2);
  qp.h << -1.0, -1.0;  // x <= -1 and x >= 1
  CHECK(solve_qp(qp).status == QpStatus::infeasible);
}

TEST_CASE("invalid problems are rejected") {
  QpProblem qp = unconstrained(Matrix::Identity(2, 2), Vector::Zero(2));
  qp.Q(0, 1) = 1.0;  // asymmetric
  CHECK_THROWS_AS(qp.validate(), ContractViolation);
  qp = unconstrained(-Matrix::Identity(2, 2), Vector::Zero(2));
  CHECK_THROWS_AS(qp.validate(), ContractViolation);
}

TEST_CASE("warm-started solver agrees with cold solves along a sequence") {
  Rng rng(5);
  QpProblem qp = test::random_qp(rng, 6, 1, 4, false);
  QpSolver solver(qp);
  for (int i = 0; i < 10; ++i) {
    qp.q = test::random_vector(rng, 6, -2.0, 2.0);
    solver.set_linear_term(qp.q);
    const QpSolution warm = solver.solve();
    const QpSolution cold = solve_qp(qp);
    REQUIRE(warm.status == QpStatus::optimal);
    CHECK((warm.x - cold.x).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("simplex projection matches the QP oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector v = test::random_vector(rng, 6, -2.0, 2.0);
    QpProblem qp = unconstrained(2.0 * Matrix::Identity(6, 6), -2.0 * v);
    qp.A = Matrix::Ones(1, 6);
    qp.b = Vector::Ones(1);
    qp.G = -Matrix::Identity(6, 6);
    qp.h = Vector::Zero(6);
    const Vector p = project_simplex(v);
    CHECK((p - solve_qp(qp, 1e-10).x).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.minCoeff() >= 0.0);
  }
}

TEST_CASE("polyhedral projection satisfies its KKT conditions") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 8;
    const Matrix A = test::random_matrix(rng, 2, n);
    const Matrix G = test::random_matrix(rng, 5, n);
    const Vector x0 = test::random_vector(rng, n);
    const Vector b = A * x0;
    const Vector h = G * x0 + test::random_vector(rng, 5, 0.0, 0.5);
    const Vector v = test::random_vector(rng, n, -4.0, 4.0);
    const Vector p = project_polyhedron(v, A, b, G, h);
    CHECK((A * p - b).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((G * p - h).maxCoeff() < 1e-8);
    // v - p must lie in the cone spanned by A' and the active rows of G.
    std::vector<Eigen::Index> act;
    for (Eigen::Index i = 0; i < 5; ++i)
      if (h[i] - G.row(i).dot(p) < 1e-7) act.push_back(i);
    Matrix C(n, 2 + static_cast<Eigen::Index>(act.size()));
    C.leftCols(2) = A.transpose();
    for (std::size_t j = 0; j < act.size(); ++j) C.col(2 + static_cast<Eigen::Index>(j)) = G.row(act[j]).transpose();
    const Vector mult = C.colPivHouseholderQr().solve(v - p);
    CHECK((C * mult - (v - p)).norm() < 1e-6);
    for (std::size_t j = 0; j < act.size(); ++j) CHECK(mult[2 + static_cast<Eigen::Index>(j)] >= -1e-6);
  }
}

TEST_CASE("qp_backward on an equality-only 2x2 matches the closed-form KKT inverse") {
  QpProblem qp = unconstrained(Vector(Eigen::Vector2d(2.0, 4.0)).asDiagonal(), Vector::Zero(2));
  qp.A = Matrix::Ones(1, 2);
  qp.b = Vector::Ones(1);
  const QpSolution sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::optimal);
  // dx/dq = -(Q^-1 - Q^-1 A'(A Q^-1 A')^-1 A Q^-1) = -[1/6 -1/6; -1/6 1/6]
  Vector v(2);
  v << 1.0, 0.0;
  const Vector g = qp_backward(qp, sol, v);
  CHECK(g[0] == doctest::Approx(-1.0 / 6.0).epsilon(1e-9));
  CHECK(g[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("qp_backward matches central differences of x*(q)") {
  Rng rng(21);
  int tested = 0;
  for (int trial = 0; trial < 40 && tested < 20; ++trial) {
    const QpProblem qp = test::random_qp(rng, 5, 1, 6, false);
    const QpSolution sol = solve_qp(qp, 1e-12);
    REQUIRE(sol.status == QpStatus::optimal);
    // Skip near-degenerate instances: weakly active rows make x*(q) kinked.
    const Vector slack = qp.h - qp.G * sol.x;
    bool degenerate = false;
    for (Eigen::Index i = 0; i < slack.size(); ++i) {
      const bool active = slack[i] < kActivityTolerance;
      if ((active && sol.dual_ineq[i] < 1e-4) || (!active && slack[i] < 1e-4)) degenerate = true;
    }
    if (degenerate) continue;
    const Vector w = test::random_vector(rng, 5);
    const Vector grad = qp_backward(qp, sol, w);
    const Vector fd = test::central_gradient(
        [&](const Vector& q) {
          QpProblem p = qp;
          p.q = q;
          return w.dot(solve_qp(p, 1e-12).x);
        },
        qp.q, 1e-5);
    CHECK(test::rel_error(grad, fd) < 1e-4);
    ++tested;
  }
  CHECK(tested == 20);
}

TEST_CASE("serialization round-trips and reports missing fields") {
  Rng rng(3);
  const QpProblem qp = test::random_qp(rng, 4, 1, 2, false);
  const QpProblem back = qp_from_json(to_json(qp));
  CHECK(back.Q == qp.Q);
  CHECK(back.h == qp.h);
  nlohmann::json j = to_json(qp);
  j.erase("G");
  CHECK_THROWS_AS(qp_from_json(j), ParseError);
}
