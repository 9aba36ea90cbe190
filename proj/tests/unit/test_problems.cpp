#include "ltof/core/error.hpp"
#include "ltof/data/nonconvex_data.hpp"
#include "ltof/problems/nonconvex_qp.hpp"
#include "ltof/problems/pgd.hpp"
#include "ltof/problems/portfolio.hpp"
#include "ltof/problems/regret.hpp"
#include "ltof/problems/toy2d.hpp"
#include "ltof/qp/qp.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace ltof;
using namespace ltof::problems;

namespace {

PortfolioProblem random_portfolio(Rng& rng, Eigen::Index d) {
  const Matrix L = test::random_matrix(rng, d, d);
  return PortfolioProblem(0.1 * L * L.transpose() + 0.01 * Matrix::Identity(d, d));
}

Vector random_simplex_point(Rng& rng, Eigen::Index d) {
  Vector e(d);
  for (Eigen::Index i = 0; i < d; ++i) e[i] = -std::log(1.0 - rng.uniform());
  return e / e.sum();
}

/// Every first-order quantity of a problem against central differences.
void check_derivatives(const ParametricProblem& p, const Vector& x, const Vector& zeta) {
  CHECK(test::rel_error(p.grad_x_objective(x, zeta),
                        test::central_gradient([&](const Vector& v) { return p.objective(v, zeta); }, x)) < 1e-6);
  CHECK(test::rel_error(p.grad_zeta_objective(x, zeta),
                        test::central_gradient([&](const Vector& z) { return p.objective(x, z); }, zeta)) < 1e-6);
  const Matrix Jg = p.ineq_jacobian(x, zeta);
  for (Eigen::Index i = 0; i < Jg.rows(); ++i) {
    const Vector fd = test::central_gradient([&](const Vector& v) { return p.ineq_residuals(v, zeta)[i]; }, x);
    CHECK(test::rel_error(Jg.row(i).transpose(), fd) < 1e-6);
  }
  const Matrix Jh = p.eq_jacobian(x, zeta);
  for (Eigen::Index i = 0; i < Jh.rows(); ++i) {
    const Vector fd = test::central_gradient([&](const Vector& v) { return p.eq_residuals(v, zeta)[i]; }, x);
    CHECK(test::rel_error(Jh.row(i).transpose(), fd) < 1e-6);
  }
}

}  // namespace

TEST_CASE("portfolio optimum beats 10,000 random simplex allocations") {
  Rng rng(1);
  const PortfolioProblem p = random_portfolio(rng, 5);
  const Vector zeta = test::random_vector(rng, 5, 0.0, 1.0);
  const Vector x = p.ground_truth(zeta);
  CHECK(std::abs(x.sum() - 1.0) < 1e-8);
  CHECK(x.minCoeff() > -1e-8);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) best = std::min(best, p.objective(random_simplex_point(rng, 5), zeta));
  CHECK(p.objective(x, zeta) <= best + 1e-9);
}

TEST_CASE("portfolio objective matches the mean-variance form") {
  Rng rng(2);
  const PortfolioProblem p = random_portfolio(rng, 4);
  const Vector x = random_simplex_point(rng, 4);
  const Vector zeta = test::random_vector(rng, 4);
  CHECK(p.objective(x, zeta) == doctest::Approx(2.0 * x.dot(p.sigma() * x) - zeta.dot(x)));
  check_derivatives(p, x, zeta);
  const qp::QpProblem qp = p.to_qp(zeta);
  CHECK(qp.objective(x) == doctest::Approx(p.objective(x, zeta)));
}

TEST_CASE("uniform allocation regret equals the direct objective difference") {
  Rng rng(3);
  const PortfolioProblem p = random_portfolio(rng, 5);
  const Vector zeta = test::random_vector(rng, 5, 0.0, 1.0);
  const Vector u = Vector::Constant(5, 0.2);
  const Vector xs = p.ground_truth(zeta);
  const double fu = 2.0 * u.dot(p.sigma() * u) - zeta.dot(u);
  const double fs = 2.0 * xs.dot(p.sigma() * xs) - zeta.dot(xs);
  const RegretResult r = regret(p, u, zeta, xs);
  CHECK(r.regret == doctest::Approx(fu - fs).epsilon(1e-12));
  CHECK(r.percent == doctest::Approx(100.0 * (fu - fs) / std::abs(fs)).epsilon(1e-12));
  CHECK(r.feasible);
  CHECK(r.regret >= -1e-9);
}

TEST_CASE("infeasible decisions are flagged, not folded into regret") {
  Rng rng(4);
  const PortfolioProblem p = random_portfolio(rng, 3);
  const Vector zeta = test::random_vector(rng, 3, 0.0, 1.0);
  Vector x(3);
  x << 0.9, 0.9, -0.3;
  const RegretResult r = regret(p, x, zeta, p.ground_truth(zeta));
  CHECK_FALSE(r.feasible);
  CHECK(r.violation.ineq == doctest::Approx(0.3));
  CHECK(r.violation.eq == doctest::Approx(0.5));
  CHECK(r.regret == doctest::Approx(p.objective(x, zeta) - p.objective(p.ground_truth(zeta), zeta)));
}

TEST_CASE("toy problem optimum beats 10,000 feasible random samples") {
  const Toy2dProblem p;
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector zeta = test::random_vector(rng, 2, 0.5, 1.5);
    const Vector x = p.ground_truth(zeta);
    CHECK(violation(p, x, zeta).max() < 1e-8);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 10000; ++i) {
      const Vector s = test::random_vector(rng, 2, -2.0, 2.0);
      if (violation(p, s, zeta).max() <= 0.0) best = std::min(best, p.objective(s, zeta));
    }
    CHECK(p.objective(x, zeta) <= best + 1e-6);
  }
  Vector x(2);
  x << 0.1, -0.3;
  check_derivatives(p, x, Vector::Ones(2));
}

TEST_CASE("nonconvex problem derivatives and Hessian diagonal") {
  const auto p = data::gen_nonconvex_problem({6, 3, 3}, 7);
  Rng rng(6);
  const Vector x = test::random_vector(rng, 6);
  const Vector zeta = test::random_vector(rng, 6, 0.0, 5.0);
  check_derivatives(*p, x, zeta);
  const Vector hd = p->hessian_diagonal(x, zeta);
  for (Eigen::Index i = 0; i < 6; ++i) {
    const Vector fd = test::central_gradient(
        [&](const Vector& v) { return p->grad_x_objective(v, zeta)[i]; }, x);
    CHECK(fd[i] == doctest::Approx(hd[i]).epsilon(1e-6));
  }
  CHECK(p->lipschitz_bound(zeta) >= hd.cwiseAbs().maxCoeff());
}

TEST_CASE("nonconvex instances admit the canonical start") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = data::gen_nonconvex_problem({20, 10, 10}, seed);
    CHECK(violation(*p, p->canonical_start(), Vector::Zero(20)).max() < 1e-9);
  }
}

TEST_CASE("with zero sine weights the ground truth recovers the convex QP solution") {
  const auto p = data::gen_nonconvex_problem({8, 4, 4}, 3);
  const LinearConstraints& lin = *p->linear_constraints();
  qp::QpProblem qp{p->mu().asDiagonal(), Vector::Zero(8), lin.A, lin.b, lin.G, lin.h};
  const qp::QpSolution sol = qp::solve_qp(qp);
  REQUIRE(sol.status == qp::QpStatus::optimal);
  const Vector x = p->ground_truth(Vector::Zero(8));
  CHECK((x - sol.x).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("nonconvex ground truth is no worse than 100,000 feasible random samples") {
  const auto p = data::gen_nonconvex_problem({10, 5, 5}, 11);
  const LinearConstraints& lin = *p->linear_constraints();
  Rng rng(12);
  const Vector zeta = test::random_vector(rng, 10, 0.0, 5.0);
  const Vector x = p->ground_truth(zeta);
  CHECK(violation(*p, x, zeta).max() < 1e-6);
  // Sample the affine hull {x : Ax = b} around the canonical start.
  const Eigen::FullPivLU<Matrix> lu(lin.A);
  const Matrix N = lu.kernel();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100000; ++i) {
    const Vector s = p->canonical_start() + N * test::random_vector(rng, N.cols(), -3.0, 3.0);
    if ((lin.G * s - lin.h).maxCoeff() <= 0.0) best = std::min(best, p->objective(s, zeta));
  }
  REQUIRE(std::isfinite(best));
  CHECK(p->objective(x, zeta) <= best + 1e-3);
}

TEST_CASE("PGD returns a projected fixed point") {
  const auto p = data::gen_nonconvex_problem({10, 5, 5}, 2);
  Rng rng(9);
  const Vector zeta = test::random_vector(rng, 10, 0.0, 5.0);
  const PgdResult r = pgd_solve(*p, zeta, p->canonical_start());
  CHECK(r.converged);
  CHECK(r.residual <= kFixedPointTolerance);
  CHECK(r.step == doctest::Approx(1.0 / p->lipschitz_bound(zeta)));
  CHECK(violation(*p, r.x, zeta).max() < 1e-8);
  CHECK(pgd_starts(*p, 16).size() == 16);
}

TEST_CASE("nonconvex regret may be negative and is reported as is") {
  const auto p = data::gen_nonconvex_problem({6, 3, 3}, 5);
  const Vector zeta = Vector::Constant(6, 2.0);
  const Vector xs = p->ground_truth(zeta);
  // Pretend a worse point was the reference: the true optimum then has negative regret.
  const Vector worse = p->canonical_start();
  const RegretResult r = regret(*p, xs, zeta, worse);
  CHECK(r.regret == doctest::Approx(p->objective(xs, zeta) - p->objective(worse, zeta)));
  CHECK(r.regret <= 0.0);
}

TEST_CASE("problems round-trip through JSON") {
  Rng rng(10);
  const PortfolioProblem port = random_portfolio(rng, 3);
  const auto back = problem_from_json(port.to_json());
  const Vector x = random_simplex_point(rng, 3);
  const Vector zeta = test::random_vector(rng, 3);
  CHECK(back->objective(x, zeta) == port.objective(x, zeta));
  const auto nc = data::gen_nonconvex_problem({6, 3, 3}, 1);
  const auto nc_back = problem_from_json(nc->to_json());
  CHECK(nc_back->tag() == "nonconvex_qp");
  CHECK(nc_back->ground_truth(zeta.head(3).replicate(2, 1)) == nc->ground_truth(zeta.head(3).replicate(2, 1)));
  CHECK(problem_from_json(Toy2dProblem().to_json())->tag() == "toy2d");
  CHECK_THROWS_AS(problem_from_json({{"tag", "knapsack"}}), ParseError);
}
