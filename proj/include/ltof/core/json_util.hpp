#pragma once

#include "ltof/core/error.hpp"
#include "ltof/core/types.hpp"

#include <json.hpp>

#include <string>

namespace ltof::json_util {

inline nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

/// Row-major nested array: one inner array per row.
inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

inline const nlohmann::json& field(const nlohmann::json& j, const std::string& name,
                                   const std::string& context) {
  if (!j.is_object() || !j.contains(name)) {
    throw ParseError(context + ": missing field '" + name + "'");
  }
  return j.at(name);
}

inline double number(const nlohmann::json& j, const std::string& context) {
  if (!j.is_number()) throw ParseError(context + ": expected a number");
  return j.get<double>();
}

inline Vector vector_from_json(const nlohmann::json& j, const std::string& context) {
  if (!j.is_array()) throw ParseError(context + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = number(j[i], context + "[" + std::to_string(i) + "]");
  }
  return v;
}

/// Parses a nested row array. An empty array yields a 0x`cols_if_empty` matrix.
inline Matrix matrix_from_json(const nlohmann::json& j, const std::string& context,
                               Eigen::Index cols_if_empty = 0) {
  if (!j.is_array()) throw ParseError(context + ": expected an array of rows");
  if (j.empty()) return Matrix(0, cols_if_empty);
  if (!j[0].is_array()) throw ParseError(context + "[0]: expected a row array");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row_ctx = context + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) {
      throw ParseError(row_ctx + ": expected a row of length " + std::to_string(cols));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), c) =
          number(j[r][static_cast<std::size_t>(c)], row_ctx + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

inline IndexList indices_from_json(const nlohmann::json& j, const std::string& context) {
  if (!j.is_array()) throw ParseError(context + ": expected an array of indices");
  IndexList out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_unsigned()) {
      throw ParseError(context + "[" + std::to_string(i) + "]: expected a nonnegative integer");
    }
    out.push_back(j[i].get<std::size_t>());
  }
  return out;
}

}  // namespace ltof::json_util
