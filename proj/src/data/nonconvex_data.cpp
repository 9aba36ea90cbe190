#include "ltof/data/nonconvex_data.hpp"

#include "ltof/core/error.hpp"
#include "ltof/core/rng.hpp"

#include <spdlog/spdlog.h>

namespace ltof::data {

namespace {
enum Stream : std::uint64_t { kInstance = 11, kParams = 12, kSplits = 13, kRestarts = 14 };
constexpr int kMaxRedraws = 100;
constexpr double kMinGramRcond = 1e-10;
}  // namespace

std::shared_ptr<problems::NonconvexQpProblem> gen_nonconvex_problem(const NonconvexDims& dims,
                                                                    std::uint64_t seed,
                                                                    std::size_t restarts) {
  LTOF_REQUIRE(dims.n > 0 && dims.n_eq > 0 && dims.n_eq <= dims.n, "need 0 < n_eq <= n");
  const auto n = static_cast<Eigen::Index>(dims.n);
  const auto me = static_cast<Eigen::Index>(dims.n_eq);
  const auto mi = static_cast<Eigen::Index>(dims.n_ineq);
  Rng rng(derive_seed(seed, kInstance));

  Vector mu(n);
  for (Eigen::Index i = 0; i < n; ++i) mu[i] = rng.uniform();
  Matrix A(me, n);
  Eigen::MatrixXd pinv;
  for (int attempt = 0;; ++attempt) {
    for (Eigen::Index r = 0; r < me; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) A(r, c) = rng.normal();
    }
    Eigen::LDLT<Eigen::MatrixXd> gram(Eigen::MatrixXd(A * A.transpose()));
    if (gram.info() == Eigen::Success && gram.rcond() > kMinGramRcond) {
      pinv = A.transpose() * gram.solve(Eigen::MatrixXd::Identity(me, me));
      break;
    }
    if (attempt + 1 >= kMaxRedraws) throw DegenerateSystem("could not draw a full-rank A");
    spdlog::warn("nonconvex instance: AA' ill-conditioned, redrawing A (attempt {})", attempt + 1);
  }
  Vector b(me);
  for (Eigen::Index i = 0; i < me; ++i) b[i] = rng.uniform(-1.0, 1.0);
  Matrix G(mi, n);
  for (Eigen::Index r = 0; r < mi; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) G(r, c) = rng.normal();
  }
  const Matrix M = G * pinv;
  const Vector h = M.cwiseAbs().rowwise().sum();
  return std::make_shared<problems::NonconvexQpProblem>(mu, A, b, G, h, restarts,
                                                        derive_seed(seed, kRestarts));
}

Matrix gen_nonconvex_params(std::size_t n_samples, std::size_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kParams));
  Matrix zeta(static_cast<Eigen::Index>(n_samples), static_cast<Eigen::Index>(n));
  for (Eigen::Index s = 0; s < zeta.rows(); ++s) {
    for (Eigen::Index i = 0; i < zeta.cols(); ++i) zeta(s, i) = rng.uniform(0.0, 5.0);
  }
  return zeta;
}

Dataset gen_nonconvex_dataset(std::size_t n_samples, const NonconvexDims& dims, std::uint64_t seed,
                              std::size_t restarts) {
  Dataset ds;
  ds.problem = gen_nonconvex_problem(dims, seed, restarts);
  ds.zeta = gen_nonconvex_params(n_samples, dims.n, seed);
  ds.z = ds.zeta;
  ds.splits = proportional_splits(n_samples, derive_seed(seed, kSplits));
  ds.seed = seed;
  ds.generator = {{"n", dims.n}, {"n_eq", dims.n_eq}, {"n_ineq", dims.n_ineq},
                  {"restarts", restarts}};
  ds.validate();
  return ds;
}

}  // namespace ltof::data
