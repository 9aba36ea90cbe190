#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace ltof {

/// Dense row-major matrix. Batches are stored one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using VectorMap = Eigen::Map<Vector>;
using ConstVectorMap = Eigen::Map<const Vector>;

using IndexList = std::vector<std::size_t>;

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

/// Gathers the given rows of `source` into a new matrix.
inline Matrix gather_rows(const Matrix& source, const IndexList& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), source.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = source.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace ltof
