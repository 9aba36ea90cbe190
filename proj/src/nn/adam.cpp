#include "ltof/nn/adam.hpp"

#include "ltof/core/error.hpp"

#include <cmath>

namespace ltof::nn {

void adam_step(AdamState& state, Eigen::Ref<Vector> params, const Vector& grads, double lr) {
  LTOF_REQUIRE(params.size() == grads.size(), "parameter/gradient length mismatch");
  LTOF_REQUIRE(state.first_moment.size() == params.size() &&
                   state.second_moment.size() == params.size(),
               "optimizer state does not match parameter count");
  if (!grads.allFinite()) throw TrainingDivergence("non-finite gradient in adam_step");

  state.step_count += 1;
  const auto t = static_cast<double>(state.step_count);
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
  state.second_moment =
      state.beta2 * state.second_moment + (1.0 - state.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  params.array() -= lr * (state.first_moment.array() / c1) /
                    ((state.second_moment.array() / c2).sqrt() + state.epsilon);
}

}  // namespace ltof::nn
