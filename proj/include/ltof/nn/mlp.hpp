#pragma once

#include "ltof/core/rng.hpp"
#include "ltof/core/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ltof::nn {

enum class OutputHead { linear, softmax, sigmoid_box };

std::string to_string(OutputHead head);
OutputHead output_head_from_string(const std::string& name);

/// Feedforward ReLU network with a configurable output head.
///
/// All parameters live in one flat buffer. Layer `l` stores its weight matrix
/// (dims[l+1] x dims[l], row-major) followed by its bias vector. Optimizers
/// operate on the flat buffer directly; gradients use the same layout.
///
/// Every mutable access bumps `revision()`, which invalidates tapes recorded
/// against earlier parameter values.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> layer_dims, OutputHead head, double box_lower = 0.0,
      double box_upper = 1.0);

  const std::vector<std::size_t>& layer_dims() const { return dims_; }
  std::size_t num_layers() const { return dims_.empty() ? 0 : dims_.size() - 1; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }
  OutputHead head() const { return head_; }
  double box_lower() const { return box_lower_; }
  double box_upper() const { return box_upper_; }

  ConstMatrixMap weight(std::size_t layer) const;
  MatrixMap weight(std::size_t layer);
  ConstVectorMap bias(std::size_t layer) const;
  VectorMap bias(std::size_t layer);

  const Vector& parameters() const { return params_; }
  Vector& mutable_parameters();
  std::size_t num_parameters() const { return static_cast<std::size_t>(params_.size()); }

  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + dims_[layer + 1] * dims_[layer];
  }

  std::uint64_t revision() const { return revision_; }

 private:
  void touch();

  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;
  Vector params_;
  OutputHead head_ = OutputHead::linear;
  double box_lower_ = 0.0;
  double box_upper_ = 1.0;
  std::uint64_t revision_ = 0;
};

/// Uniform initialization on [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and
/// biases of every layer. Bitwise reproducible given the seed.
Mlp mlp_init(const std::vector<std::size_t>& layer_dims, OutputHead head, std::uint64_t seed);

/// Builds dims [input, hidden x hidden_layers, output].
std::vector<std::size_t> layer_dims_for(std::size_t input, std::size_t hidden_width,
                                        std::size_t hidden_layers, std::size_t output);

struct DropoutConfig {
  double rate = 0.0;
  Rng* rng = nullptr;
};

/// Activation record of a forward pass; enough to run the exact backward pass.
struct Tape {
  const Mlp* net = nullptr;
  std::uint64_t revision = 0;
  std::vector<Matrix> inputs;     // input to each layer (post-activation, post-dropout)
  std::vector<Matrix> preacts;    // pre-activation output of each layer
  std::vector<Matrix> masks;      // dropout scale masks of hidden layers, empty when off
  Matrix output;
};

/// Batched forward: `inputs` holds one sample per row.
Matrix forward_batch(const Mlp& net, const Matrix& inputs, Tape* tape = nullptr,
                     const DropoutConfig& dropout = {});

struct ForwardResult {
  Vector y;
  Tape tape;
};

ForwardResult mlp_forward(const Mlp& net, const Vector& x);

struct BatchGradients {
  Vector params;   // same layout as Mlp::parameters()
  Matrix inputs;   // gradient with respect to each input row
};

/// Exact gradients of the scalar whose gradient with respect to the output
/// batch is `d_outputs`. Parameter gradients are summed over the batch.
BatchGradients backward_batch(const Mlp& net, const Tape& tape, const Matrix& d_outputs);

struct Gradients {
  Vector params;
  Vector input;
};

Gradients mlp_backward(const Mlp& net, const Tape& tape, const Vector& d_output);

}  // namespace ltof::nn
