#include "ltof/core/error.hpp"
#include "ltof/data/nonconvex_data.hpp"
#include "ltof/data/portfolio_data.hpp"
#include "ltof/lto/infer.hpp"
#include "ltof/nn/mlp.hpp"
#include "ltof/problems/pgd.hpp"
#include "ltof/problems/portfolio.hpp"
#include "ltof/problems/toy2d.hpp"
#include "ltof/pto/epo_pgd.hpp"
#include "ltof/pto/epo_qp.hpp"
#include "ltof/pto/frozen_proxy.hpp"
#include "ltof/pto/shift_probe.hpp"
#include "ltof/pto/two_stage.hpp"
#include "ltof/qp/projection.hpp"
#include "ltof/qp/qp_backward.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace ltof;
using namespace ltof::pto;

namespace {

std::shared_ptr<problems::PortfolioProblem> portfolio(std::uint64_t seed, Eigen::Index d) {
  Rng rng(seed);
  const Matrix L = test::random_matrix(rng, d, d);
  return std::make_shared<problems::PortfolioProblem>(0.1 * L * L.transpose() +
                                                      0.05 * Matrix::Identity(d, d));
}

data::Dataset small_portfolio(std::size_t k) {
  data::Dataset ds = data::gen_portfolio_dataset(120, 4, 3);
  data::precompute_targets(ds);
  return data::with_features(ds, k, 5, 6);
}

data::Dataset small_nonconvex(std::size_t k) {
  data::Dataset ds = data::gen_nonconvex_dataset(60, {6, 3, 3}, 4, 4);
  data::precompute_targets(ds);
  return data::with_features(ds, k, 5, 8);
}

PtoConfig short_pto(std::size_t m, std::size_t epochs = 5) {
  PtoConfig c;
  c.m = m;
  c.hidden_width = 16;
  c.epochs = epochs;
  c.batch_size = 32;
  c.seed = 3;
  return c;
}

lto::TrainConfig short_lto(lto::Method method, std::size_t epochs = 5) {
  lto::TrainConfig c;
  c.method = method;
  c.mode = lto::Mode::lto;
  c.epochs = epochs;
  c.batch_size = 32;
  c.hidden_width = 16;
  c.seed = 9;
  return c;
}

}  // namespace

TEST_CASE("MSE loss and gradient") {
  Matrix a(2, 2), b(2, 2), g;
  a << 1.0, 2.0, 3.0, 4.0;
  b << 0.0, 2.0, 1.0, 4.0;
  // (1 + 0 + 4 + 0) / 2
  CHECK(mse_loss(a, b, &g) == doctest::Approx(2.5));
  CHECK(g(0, 0) == doctest::Approx(1.0));
  CHECK(g(1, 0) == doctest::Approx(2.0));
  CHECK(g(1, 1) == 0.0);
}

TEST_CASE("QP decision loss gradient matches differences through the solver") {
  const auto p = portfolio(1, 4);
  Rng rng(2);
  int tested = 0;
  for (int trial = 0; trial < 60 && tested < 20; ++trial) {
    const Vector zeta = test::random_vector(rng, 4, 0.0, 1.0);
    const Vector zeta_hat = zeta + 0.3 * test::random_vector(rng, 4);
    // Skip near-degenerate solutions, where x*(zeta_hat) is kinked.
    const qp::QpProblem qp = convex_qp_for(*p, zeta_hat);
    const qp::QpSolution sol = qp::solve_qp(qp);
    const Vector x = sol.x;
    bool degenerate = false;
    for (Eigen::Index i = 0; i < 4; ++i) {
      if ((x[i] > 1e-9 && x[i] < 1e-4) || (x[i] <= 1e-9 && sol.dual_ineq[i] < 1e-4)) degenerate = true;
    }
    if (degenerate) continue;
    Vector grad;
    epo_qp_sample_loss(*p, zeta_hat, zeta, &grad);
    const Vector fd = test::central_gradient(
        [&](const Vector& v) { return epo_qp_sample_loss(*p, v, zeta, nullptr); }, zeta_hat, 1e-5);
    CHECK(test::rel_error(grad, fd) < 1e-4);
    ++tested;
  }
  CHECK(tested == 20);
}

TEST_CASE("end-to-end predictor gradient through the QP matches differences") {
  const auto p = portfolio(3, 4);
  Rng rng(4);
  const Matrix Z = test::random_matrix(rng, 6, 3);
  const Matrix zeta = (test::random_matrix(rng, 6, 4).array() * 0.2 + 0.5).matrix();
  const nn::Mlp net = nn::mlp_init({3, 5, 4}, nn::OutputHead::linear, 5);
  auto loss_of = [&](const nn::Mlp& n, Matrix* d_out) {
    const Matrix zh = nn::forward_batch(n, Z);
    double total = 0.0;
    if (d_out) d_out->resize(zh.rows(), zh.cols());
    for (Eigen::Index r = 0; r < zh.rows(); ++r) {
      Vector g;
      total += epo_qp_sample_loss(*p, zh.row(r).transpose(), zeta.row(r).transpose(), d_out ? &g : nullptr);
      if (d_out) d_out->row(r) = g.transpose() / 6.0;
    }
    return total / 6.0;
  };
  nn::Tape tape;
  nn::forward_batch(net, Z, &tape);
  Matrix d_out;
  loss_of(net, &d_out);
  const Vector grad = nn::backward_batch(net, tape, d_out).params;
  const Vector fd = test::central_gradient(
      [&](const Vector& params) {
        nn::Mlp copy = net;
        copy.mutable_parameters() = params;
        return loss_of(copy, nullptr);
      },
      net.parameters(), 1e-5);
  CHECK(test::rel_error(grad, fd) < 1e-3);
}

TEST_CASE("PGD fixed-point VJP reduces to the QP KKT gradient in the convex case") {
  const auto p = data::gen_nonconvex_problem({8, 4, 4}, 6);
  const auto& lin = *p->linear_constraints();
  const Vector zeta = Vector::Zero(8);
  const problems::PgdResult r = problems::pgd_solve(*p, zeta, p->canonical_start());
  REQUIRE(r.converged);
  const qp::QpProblem qp{p->mu().asDiagonal(), Vector::Zero(8), lin.A, lin.b, lin.G, lin.h};
  const qp::QpSolution sol = qp::solve_qp(qp, 1e-12);
  REQUIRE((sol.x - r.x).cwiseAbs().maxCoeff() < 1e-6);
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector v = test::random_vector(rng, 8);
    const Vector got = pgd_fixed_point_vjp(*p, zeta, sol.x, r.step, v);
    // grad_x f = mu x + zeta .* cos(x), so dq/dzeta = diag(cos(x)).
    const Vector want = sol.x.array().cos() * qp::qp_backward(qp, sol, v).array();
    CHECK(test::rel_error(got, want) < 1e-6);
  }
}

TEST_CASE("PGD decision loss gradient matches differences of re-solved fixed points") {
  const auto p = data::gen_nonconvex_problem({8, 4, 4}, 8);
  const auto& lin = *p->linear_constraints();
  qp::PolyhedronProjector projector(lin.A, lin.b, lin.G, lin.h, 1e-12);
  problems::PgdSettings settings;
  settings.tol = 1e-11;
  settings.max_iter = 200000;
  Rng rng(9);
  int tested = 0;
  for (int trial = 0; trial < 40 && tested < 10; ++trial) {
    const Vector zeta = test::random_vector(rng, 8, 0.0, 5.0);
    const Vector zeta_hat = zeta + 0.2 * test::random_vector(rng, 8);
    Vector start = p->canonical_start();
    Vector grad;
    try {
      epo_pgd_sample_loss(*p, zeta_hat, zeta, start, projector, settings, &grad);
    } catch (const DegenerateSystem&) {
      continue;
    }
    // Skip weakly active rows, where the fixed point is not differentiable.
    const Vector slack = lin.h - lin.G * start;
    if ((slack.array() > qp::kActivityTolerance && slack.array() < 1e-4).any()) continue;
    const Vector x0 = start;
    const Vector fd = test::central_gradient(
        [&](const Vector& v) {
          Vector s = x0;
          return epo_pgd_sample_loss(*p, v, zeta, s, projector, settings, nullptr);
        },
        zeta_hat, 1e-5);
    CHECK(test::rel_error(grad, fd) < 1e-3);
    ++tested;
  }
  CHECK(tested >= 5);
}

TEST_CASE("frozen-proxy loss gradient matches differences and the proxy stays fixed") {
  for (lto::Method method : {lto::Method::ld, lto::Method::dc3}) {
    const data::Dataset base = small_nonconvex(0);
    const lto::TrainedModel proxy = lto::lto_train(base, short_lto(method));
    Rng rng(10);
    const Matrix zeta = base.zeta.topRows(4);
    const Matrix zeta_hat = zeta + 0.3 * test::random_matrix(rng, 4, 6);
    Matrix grad;
    frozen_proxy_loss(proxy, *base.problem, zeta_hat, zeta, &grad);
    const Vector flat = Eigen::Map<const Vector>(zeta_hat.data(), zeta_hat.size());
    const Vector fd = test::central_gradient(
        [&](const Vector& v) {
          return frozen_proxy_loss(proxy, *base.problem, Eigen::Map<const Matrix>(v.data(), 4, 6), zeta, nullptr);
        },
        flat);
    CHECK(test::rel_error(Eigen::Map<const Vector>(grad.data(), grad.size()), fd) < 1e-4);

    const Vector before = proxy.net.parameters();
    const data::Dataset ds = data::with_features(base, 2, 5, 8);
    const PredictorModel c = frozen_proxy_train(proxy, ds, short_pto(1), false);
    CHECK(proxy.net.parameters() == before);
    CHECK(c.kind == Baseline::frozen_proxy);
    const PredictorModel pre = frozen_proxy_train(proxy, ds, short_pto(1), true);
    CHECK(pre.kind == Baseline::frozen_proxy_pretrained);
    CHECK(proxy.net.parameters() == before);
  }
}

TEST_CASE("predictor pipelines report phase timings with et >= it") {
  const data::Dataset ds = small_portfolio(2);
  const PredictorModel two = two_stage_train(ds, short_pto(2));
  const lto::EvalSummary s = evaluate_predictor(two, ds, data::Split::test);
  CHECK(s.mean_infer_seconds > 0.0);
  CHECK(s.mean_solve_seconds > 0.0);
  CHECK(s.mean_infer_seconds + s.mean_solve_seconds + s.mean_restore_seconds >= s.mean_infer_seconds);
  CHECK(s.solve_failures == 0);
  CHECK(s.mean_regret_post >= -1e-6);
  CHECK(s.max_violation_post <= 1e-6);
  CHECK(two.net.num_layers() == 3);
}

TEST_CASE("baselines are deterministic and reject invalid depth") {
  const data::Dataset ds = small_portfolio(2);
  CHECK(two_stage_train(ds, short_pto(1)).net.parameters() ==
        two_stage_train(ds, short_pto(1)).net.parameters());
  CHECK(epo_qp_train(ds, short_pto(1, 2)).net.parameters() ==
        epo_qp_train(ds, short_pto(1, 2)).net.parameters());
  CHECK_THROWS_AS(two_stage_train(ds, short_pto(0)), ContractViolation);
  CHECK_THROWS_AS(epo_pgd_train(ds, short_pto(1)), ContractViolation);
}

TEST_CASE("EPO through PGD trains on the nonconvex problem") {
  const data::Dataset ds = small_nonconvex(2);
  const PredictorModel m = epo_pgd_train(ds, short_pto(1, 2));
  CHECK(m.kind == Baseline::epo);
  const lto::EvalSummary s = evaluate_predictor(m, ds, data::Split::test);
  CHECK(s.samples == ds.splits.test.size());
  CHECK(s.max_violation_post <= 1e-6);
}

TEST_CASE("EPO training lowers the regret of its initial predictor on the portfolio") {
  data::Dataset ds = data::gen_portfolio_dataset(600, 10, 2);
  data::precompute_targets(ds);
  ds = data::with_features(ds, 2, 4, 30);
  PtoConfig c = short_pto(1, 100);
  c.hidden_width = 64;
  PredictorModel init;
  init.kind = Baseline::epo;
  init.scaler = lto::prepare_inputs(ds, lto::Mode::ltof).scaler;
  init.net = init_predictor(30, ds.problem->n_param(), c, 31);
  const double before = evaluate_predictor(init, ds, data::Split::test).score();
  const double epo = evaluate_predictor(epo_qp_train(ds, c), ds, data::Split::test).score();
  const double two = evaluate_predictor(two_stage_train(ds, c), ds, data::Split::test).score();
  MESSAGE("initial " << before << "%, EPO " << epo << "%, two-stage " << two << "%");
  CHECK(epo < 0.5 * before);
}

TEST_CASE("shift probe covers each scale once and degrades away from the training range") {
  ShiftProbeConfig c;
  c.n_samples = 600;
  c.seed = 1;
  c.proxy.epochs = 100;
  const ShiftProbeRun run = run_toy_shift_probe(c);
  REQUIRE(run.report.points.size() == c.scales.size());
  for (std::size_t i = 0; i < c.scales.size(); ++i) CHECK(run.report.points[i].scale == c.scales[i]);
  double at1 = 0.0, at4 = 0.0;
  for (const ShiftPoint& p : run.report.points) {
    if (p.scale == 1.0) at1 = p.mean_regret;
    if (p.scale == 4.0) at4 = p.mean_regret;
  }
  CHECK(at1 == run.report.reference_regret);
  CHECK(at4 > at1);

  auto toy = std::make_shared<problems::Toy2dProblem>();
  const Matrix zetas = Matrix::Ones(3, 2);
  CHECK_THROWS_AS(distribution_shift_probe(run.proxy, toy, zetas, {1.0, 1.0}), ContractViolation);
  CHECK_THROWS_AS(distribution_shift_probe(run.proxy, toy, zetas, {0.0, 1.0}), ContractViolation);
}
