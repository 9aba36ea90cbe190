#pragma once

#include "ltof/core/types.hpp"

#include <cstdint>

namespace ltof::nn {

struct AdamState {
  Vector first_moment;
  Vector second_moment;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(std::size_t num_params = 0)
      : first_moment(Vector::Zero(static_cast<Eigen::Index>(num_params))),
        second_moment(Vector::Zero(static_cast<Eigen::Index>(num_params))) {}
};

/// One bias-corrected Adam update of `params` in place.
/// Throws TrainingDivergence (leaving params untouched) on non-finite gradients.
void adam_step(AdamState& state, Eigen::Ref<Vector> params, const Vector& grads, double lr);

}  // namespace ltof::nn
