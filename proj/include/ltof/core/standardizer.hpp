#pragma once

#include "ltof/core/types.hpp"

#include <json.hpp>

namespace ltof {

/// Per-column affine normalization fitted on a training split.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& rows);
  static Standardizer identity(std::size_t dim);

  Matrix apply(const Matrix& rows) const;
  Vector apply(const Vector& row) const;
  /// Maps a gradient with respect to standardized inputs back to raw inputs.
  Matrix backprop(const Matrix& d_standardized) const;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

nlohmann::json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

}  // namespace ltof
