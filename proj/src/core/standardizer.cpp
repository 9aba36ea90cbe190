#include "ltof/core/standardizer.hpp"

#include "ltof/core/error.hpp"
#include "ltof/core/json_util.hpp"

#include <cmath>

namespace ltof {

Standardizer Standardizer::fit(const Matrix& rows) {
  LTOF_REQUIRE(rows.rows() > 0, "cannot fit on an empty matrix");
  Standardizer s;
  s.mean = rows.colwise().mean().transpose();
  s.scale.resize(rows.cols());
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    const double var = (rows.col(c).array() - s.mean[c]).square().mean();
    const double sd = std::sqrt(var);
    s.scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(std::size_t dim) {
  Standardizer s;
  s.mean = Vector::Zero(static_cast<Eigen::Index>(dim));
  s.scale = Vector::Ones(static_cast<Eigen::Index>(dim));
  return s;
}

Matrix Standardizer::apply(const Matrix& rows) const {
  LTOF_REQUIRE(rows.cols() == mean.size(), "column count mismatch");
  Matrix out = rows;
  out.rowwise() -= mean.transpose();
  out.array().rowwise() /= scale.transpose().array();
  return out;
}

Vector Standardizer::apply(const Vector& row) const {
  LTOF_REQUIRE(row.size() == mean.size(), "dimension mismatch");
  return ((row - mean).array() / scale.array()).matrix();
}

Matrix Standardizer::backprop(const Matrix& d_standardized) const {
  Matrix out = d_standardized;
  out.array().rowwise() /= scale.transpose().array();
  return out;
}

nlohmann::json to_json(const Standardizer& s) {
  return {{"mean", json_util::vector_to_json(s.mean)},
          {"scale", json_util::vector_to_json(s.scale)}};
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
  Standardizer s;
  s.mean = json_util::vector_from_json(json_util::field(j, "mean", "standardizer"), "standardizer.mean");
  s.scale =
      json_util::vector_from_json(json_util::field(j, "scale", "standardizer"), "standardizer.scale");
  if (s.mean.size() != s.scale.size()) throw ParseError("standardizer: mean/scale length mismatch");
  return s;
}

}  // namespace ltof
