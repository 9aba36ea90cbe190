#pragma once

#include "ltof/core/types.hpp"
#include "ltof/data/dataset.hpp"

#include <cstdint>

namespace ltof::data {

/// Synthetic market standing in for historical prices. Base returns follow a
/// factor model in which every factor and idiosyncratic term is a stationary
/// AR(1) process around a per-asset mean:
///   zeta_hat_t = m + F f_t + e_t.
/// The problem covariance is that of alpha * zeta_hat: alpha^2 (F Sigma_F F' + D).
struct MarketConfig {
  std::size_t factors = 3;
  std::size_t history = 1260;       // length of the base series; samples cycle over it
  double reversion = 0.9;           // AR(1) coefficient of factors and idiosyncratic terms
  double mean_low = 2.5;            // per-asset mean return range
  double mean_high = 3.5;
  double market_loading = 1.0;      // mean loading on the first (market) factor
  double market_dispersion = 0.25;  // spread of market loadings across assets
  double style_loading = 0.5;       // sd of loadings on the remaining factors
  double idio_low = 0.2;            // idiosyncratic sd range
  double idio_high = 0.5;
};

struct PortfolioParams {
  Matrix zeta;       // N x D, zeta = alpha (zeta_hat + eps)
  Matrix zeta_hat;   // N x D base returns
  Matrix noise;      // N x D, eps ~ N(0, sigma_eps^2 I)
  Matrix sigma;      // D x D covariance of alpha * zeta_hat
  Matrix loadings;   // D x factors
  Vector factor_variance;
  Vector idio_variance;
};

inline constexpr double kDefaultAlpha = 0.24;
inline constexpr double kDefaultSigmaEps = 0.05;

PortfolioParams gen_portfolio_params(std::size_t n_samples, std::size_t assets, std::uint64_t seed,
                                     double sigma_eps = kDefaultSigmaEps,
                                     double alpha = kDefaultAlpha,
                                     const MarketConfig& market = {});

/// PortfolioProblem over the generated covariance plus n_samples parameter
/// draws (identity features, no targets).
Dataset gen_portfolio_dataset(std::size_t n_samples, std::size_t assets, std::uint64_t seed,
                              double sigma_eps = kDefaultSigmaEps, const MarketConfig& market = {});

}  // namespace ltof::data
