#pragma once

#include "ltof/data/dataset.hpp"
#include "ltof/problems/nonconvex_qp.hpp"

#include <cstdint>
#include <memory>

namespace ltof::data {

struct NonconvexDims {
  std::size_t n = 20;
  std::size_t n_eq = 10;
  std::size_t n_ineq = 10;
};

/// Q = diag(mu), mu ~ U(0, 1); A, G ~ N(0, 1); b ~ U(-1, 1);
/// h_i = sum_j |M_ij| with M = G A^+ and A^+ the right pseudo-inverse A'(AA')^-1.
/// A draw with an ill-conditioned AA' is rejected and redrawn.
std::shared_ptr<problems::NonconvexQpProblem> gen_nonconvex_problem(
    const NonconvexDims& dims, std::uint64_t seed,
    std::size_t restarts = problems::NonconvexQpProblem::kDefaultRestarts);

/// zeta ~ U(0, 5)^n, one sample per row.
Matrix gen_nonconvex_params(std::size_t n_samples, std::size_t n, std::uint64_t seed);

/// Problem plus n_samples parameter draws (identity features, no targets).
Dataset gen_nonconvex_dataset(std::size_t n_samples, const NonconvexDims& dims, std::uint64_t seed,
                              std::size_t restarts = problems::NonconvexQpProblem::kDefaultRestarts);

}  // namespace ltof::data
