#include "ltof/data/features.hpp"

#include "ltof/core/error.hpp"

namespace ltof::data {

FeatureGenerator::FeatureGenerator(std::size_t param_dim, std::size_t feature_dim, std::size_t k,
                                   std::uint64_t seed)
    : param_dim_(param_dim), feature_dim_(k == 0 ? param_dim : feature_dim), k_(k), seed_(seed) {
  LTOF_REQUIRE(param_dim_ > 0 && feature_dim_ > 0, "dimensions must be positive");
  if (k_ > 0) {
    net_ = nn::mlp_init(nn::layer_dims_for(param_dim_, kFeatureHiddenWidth, k_, feature_dim_),
                        nn::OutputHead::linear, seed_);
  }
}

Matrix FeatureGenerator::apply(const Matrix& zetas) const {
  LTOF_REQUIRE(static_cast<std::size_t>(zetas.cols()) == param_dim_, "parameter width mismatch");
  if (k_ == 0) return zetas;
  return nn::forward_batch(net_, zetas);
}

Matrix gen_features(const Matrix& zetas, std::size_t k, std::uint64_t seed,
                    std::size_t feature_dim) {
  return FeatureGenerator(static_cast<std::size_t>(zetas.cols()), feature_dim, k, seed)
      .apply(zetas);
}

}  // namespace ltof::data
