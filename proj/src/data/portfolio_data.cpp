#include "ltof/data/portfolio_data.hpp"

#include "ltof/core/error.hpp"
#include "ltof/core/rng.hpp"
#include "ltof/problems/portfolio.hpp"

#include <cmath>

namespace ltof::data {

namespace {
enum Stream : std::uint64_t { kStructure = 1, kPath = 2, kNoise = 3, kSplits = 4 };
}

PortfolioParams gen_portfolio_params(std::size_t n_samples, std::size_t assets, std::uint64_t seed,
                                     double sigma_eps, double alpha, const MarketConfig& market) {
  LTOF_REQUIRE(n_samples >= 1 && assets >= 1, "sample and asset counts must be positive");
  LTOF_REQUIRE(market.factors >= 1 && market.history >= 1, "need a factor and a history");
  LTOF_REQUIRE(std::abs(market.reversion) < 1.0, "AR(1) coefficient must lie in (-1, 1)");
  LTOF_REQUIRE(sigma_eps >= 0.0, "noise scale must be nonnegative");
  const auto D = static_cast<Eigen::Index>(assets);
  const auto L = static_cast<Eigen::Index>(market.factors);
  const auto T = static_cast<Eigen::Index>(market.history);
  const auto N = static_cast<Eigen::Index>(n_samples);
  const double phi = market.reversion;
  const double innovation = std::sqrt(1.0 - phi * phi);

  PortfolioParams out;
  Rng structure(derive_seed(seed, kStructure));
  Vector mean(D);
  for (Eigen::Index i = 0; i < D; ++i) mean[i] = structure.uniform(market.mean_low, market.mean_high);
  out.loadings.resize(D, L);
  for (Eigen::Index i = 0; i < D; ++i) {
    out.loadings(i, 0) = structure.normal(market.market_loading, market.market_dispersion);
    for (Eigen::Index l = 1; l < L; ++l) out.loadings(i, l) = structure.normal(0.0, market.style_loading);
  }
  out.factor_variance = Vector::Ones(L);
  Vector idio_sd(D);
  for (Eigen::Index i = 0; i < D; ++i) idio_sd[i] = structure.uniform(market.idio_low, market.idio_high);
  out.idio_variance = idio_sd.cwiseProduct(idio_sd);
  out.sigma = out.loadings * out.factor_variance.asDiagonal() * out.loadings.transpose();
  out.sigma.diagonal() += out.idio_variance;
  out.sigma *= alpha * alpha;

  // Stationary AR(1) paths with unit factor variance and idio_sd^2 idiosyncratic variance.
  Rng path(derive_seed(seed, kPath));
  Matrix base(T, D);
  Vector f(L);
  Vector e(D);
  for (Eigen::Index l = 0; l < L; ++l) f[l] = path.normal();
  for (Eigen::Index i = 0; i < D; ++i) e[i] = idio_sd[i] * path.normal();
  for (Eigen::Index t = 0; t < T; ++t) {
    if (t > 0) {
      for (Eigen::Index l = 0; l < L; ++l) f[l] = phi * f[l] + innovation * path.normal();
      for (Eigen::Index i = 0; i < D; ++i) e[i] = phi * e[i] + innovation * idio_sd[i] * path.normal();
    }
    base.row(t) = (mean + out.loadings * f + e).transpose();
  }

  Rng noise(derive_seed(seed, kNoise));
  out.zeta_hat.resize(N, D);
  out.noise.resize(N, D);
  for (Eigen::Index s = 0; s < N; ++s) {
    out.zeta_hat.row(s) = base.row(s % T);
    for (Eigen::Index i = 0; i < D; ++i) out.noise(s, i) = sigma_eps * noise.normal();
  }
  out.zeta = alpha * (out.zeta_hat + out.noise);
  return out;
}

Dataset gen_portfolio_dataset(std::size_t n_samples, std::size_t assets, std::uint64_t seed,
                              double sigma_eps, const MarketConfig& market) {
  PortfolioParams params = gen_portfolio_params(n_samples, assets, seed, sigma_eps, kDefaultAlpha, market);
  Dataset ds;
  ds.problem = std::make_shared<problems::PortfolioProblem>(params.sigma);
  ds.zeta = std::move(params.zeta);
  ds.z = ds.zeta;
  ds.splits = proportional_splits(n_samples, derive_seed(seed, kSplits));
  ds.seed = seed;
  ds.generator = {{"assets", assets},
                  {"sigma_eps", sigma_eps},
                  {"alpha", kDefaultAlpha},
                  {"factors", market.factors},
                  {"history", market.history},
                  {"reversion", market.reversion},
                  {"mean_range", {market.mean_low, market.mean_high}},
                  {"market_loading", market.market_loading},
                  {"market_dispersion", market.market_dispersion},
                  {"style_loading", market.style_loading},
                  {"idio_range", {market.idio_low, market.idio_high}}};
  ds.validate();
  return ds;
}

}  // namespace ltof::data
