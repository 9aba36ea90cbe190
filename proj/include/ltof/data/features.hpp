#pragma once

#include "ltof/core/types.hpp"
#include "ltof/nn/mlp.hpp"

#include <cstdint>

namespace ltof::data {

inline constexpr std::size_t kFeatureHiddenWidth = 50;

/// Frozen random network z = G^k(zeta) with k hidden ReLU layers of width 50
/// and a linear output layer. k = 0 is the identity map.
class FeatureGenerator {
 public:
  FeatureGenerator(std::size_t param_dim, std::size_t feature_dim, std::size_t k,
                   std::uint64_t seed);

  std::size_t k() const { return k_; }
  std::size_t param_dim() const { return param_dim_; }
  std::size_t feature_dim() const { return feature_dim_; }
  std::uint64_t seed() const { return seed_; }
  /// Empty network when k = 0.
  const nn::Mlp& net() const { return net_; }

  /// One parameter vector per row in, one feature vector per row out.
  Matrix apply(const Matrix& zetas) const;

 private:
  std::size_t param_dim_;
  std::size_t feature_dim_;
  std::size_t k_;
  std::uint64_t seed_;
  nn::Mlp net_;
};

/// z_i = G^k(zeta_i) with one generator for the whole set. For k = 0 the
/// feature dimension is ignored and z = zeta.
Matrix gen_features(const Matrix& zetas, std::size_t k, std::uint64_t seed,
                    std::size_t feature_dim);

}  // namespace ltof::data
