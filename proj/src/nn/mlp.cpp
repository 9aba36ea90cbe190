#include "ltof/nn/mlp.hpp"

#include "ltof/core/error.hpp"

#include <atomic>
#include <cmath>

namespace ltof::nn {

namespace {

std::uint64_t next_revision() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

void apply_head(OutputHead head, double lo, double hi, Matrix& z) {
  switch (head) {
    case OutputHead::linear:
      return;
    case OutputHead::softmax:
      for (Eigen::Index r = 0; r < z.rows(); ++r) {
        const double peak = z.row(r).maxCoeff();
        z.row(r) = (z.row(r).array() - peak).exp();
        z.row(r) /= z.row(r).sum();
      }
      return;
    case OutputHead::sigmoid_box:
      z = (lo + (hi - lo) / (1.0 + (-z.array()).exp())).matrix();
      return;
  }
}

}  // namespace

std::string to_string(OutputHead head) {
  switch (head) {
    case OutputHead::linear:
      return "linear";
    case OutputHead::softmax:
      return "softmax";
    case OutputHead::sigmoid_box:
      return "sigmoid_box";
  }
  return "linear";
}

OutputHead output_head_from_string(const std::string& name) {
  if (name == "linear") return OutputHead::linear;
  if (name == "softmax") return OutputHead::softmax;
  if (name == "sigmoid_box") return OutputHead::sigmoid_box;
  throw ContractViolation("unknown output head '" + name + "'");
}

Mlp::Mlp(std::vector<std::size_t> layer_dims, OutputHead head, double box_lower, double box_upper)
    : dims_(std::move(layer_dims)), head_(head), box_lower_(box_lower), box_upper_(box_upper) {
  LTOF_REQUIRE(dims_.size() >= 2, "need at least one layer");
  for (std::size_t d : dims_) LTOF_REQUIRE(d > 0, "layer widths must be positive");
  LTOF_REQUIRE(box_upper_ > box_lower_, "empty output box");
  std::size_t total = 0;
  offsets_.reserve(dims_.size() - 1);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(total);
    total += dims_[l + 1] * dims_[l] + dims_[l + 1];
  }
  params_ = Vector::Zero(static_cast<Eigen::Index>(total));
  touch();
}

void Mlp::touch() { revision_ = next_revision(); }

ConstMatrixMap Mlp::weight(std::size_t layer) const {
  return ConstMatrixMap(params_.data() + offsets_.at(layer),
                        static_cast<Eigen::Index>(dims_[layer + 1]),
                        static_cast<Eigen::Index>(dims_[layer]));
}

MatrixMap Mlp::weight(std::size_t layer) {
  touch();
  return MatrixMap(params_.data() + offsets_.at(layer), static_cast<Eigen::Index>(dims_[layer + 1]),
                   static_cast<Eigen::Index>(dims_[layer]));
}

ConstVectorMap Mlp::bias(std::size_t layer) const {
  return ConstVectorMap(params_.data() + bias_offset(layer),
                        static_cast<Eigen::Index>(dims_[layer + 1]));
}

VectorMap Mlp::bias(std::size_t layer) {
  touch();
  return VectorMap(params_.data() + bias_offset(layer), static_cast<Eigen::Index>(dims_[layer + 1]));
}

Vector& Mlp::mutable_parameters() {
  touch();
  return params_;
}

Mlp mlp_init(const std::vector<std::size_t>& layer_dims, OutputHead head, std::uint64_t seed) {
  LTOF_REQUIRE(!layer_dims.empty(), "empty layer dims");
  Mlp net(layer_dims, head);
  Rng rng(seed);
  Vector& p = net.mutable_parameters();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer_dims[l]));
    const std::size_t begin = net.weight_offset(l);
    const std::size_t end = net.bias_offset(l) + layer_dims[l + 1];
    for (std::size_t i = begin; i < end; ++i) p[static_cast<Eigen::Index>(i)] = rng.uniform(-bound, bound);
  }
  return net;
}

std::vector<std::size_t> layer_dims_for(std::size_t input, std::size_t hidden_width,
                                        std::size_t hidden_layers, std::size_t output) {
  std::vector<std::size_t> dims{input};
  for (std::size_t i = 0; i < hidden_layers; ++i) dims.push_back(hidden_width);
  dims.push_back(output);
  return dims;
}

Matrix forward_batch(const Mlp& net, const Matrix& inputs, Tape* tape, const DropoutConfig& dropout) {
  LTOF_REQUIRE(net.num_layers() >= 1, "uninitialized network");
  LTOF_REQUIRE(static_cast<std::size_t>(inputs.cols()) == net.input_dim(),
               "input width " + std::to_string(inputs.cols()) + " != " +
                   std::to_string(net.input_dim()));
  const bool use_dropout = dropout.rate > 0.0;
  LTOF_REQUIRE(!use_dropout || dropout.rng != nullptr, "dropout requires an rng");
  LTOF_REQUIRE(dropout.rate < 1.0, "dropout rate must be < 1");

  if (tape != nullptr) {
    tape->net = &net;
    tape->revision = net.revision();
    tape->inputs.clear();
    tape->preacts.clear();
    tape->masks.clear();
  }

  Matrix h = inputs;
  const std::size_t layers = net.num_layers();
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z = h * net.weight(l).transpose();
    z.rowwise() += net.bias(l).transpose();
    if (tape != nullptr) {
      tape->inputs.push_back(std::move(h));
      tape->preacts.push_back(z);
    }
    if (l + 1 < layers) {
      h = z.cwiseMax(0.0);
      if (use_dropout) {
        Matrix mask(h.rows(), h.cols());
        const double keep_scale = 1.0 / (1.0 - dropout.rate);
        for (Eigen::Index i = 0; i < mask.size(); ++i) {
          mask.data()[i] = dropout.rng->uniform() < dropout.rate ? 0.0 : keep_scale;
        }
        h.array() *= mask.array();
        if (tape != nullptr) tape->masks.push_back(std::move(mask));
      }
    } else {
      apply_head(net.head(), net.box_lower(), net.box_upper(), z);
      h = std::move(z);
    }
  }
  if (tape != nullptr) tape->output = h;
  return h;
}

ForwardResult mlp_forward(const Mlp& net, const Vector& x) {
  LTOF_REQUIRE(static_cast<std::size_t>(x.size()) == net.input_dim(), "input dimension mismatch");
  ForwardResult result;
  const Matrix out = forward_batch(net, Matrix(x.transpose()), &result.tape);
  result.y = out.row(0).transpose();
  return result;
}

BatchGradients backward_batch(const Mlp& net, const Tape& tape, const Matrix& d_outputs) {
  LTOF_REQUIRE(tape.net == &net && tape.revision == net.revision(),
               "tape was recorded against a different or since-modified network");
  const std::size_t layers = net.num_layers();
  LTOF_REQUIRE(tape.inputs.size() == layers && tape.preacts.size() == layers, "incomplete tape");
  LTOF_REQUIRE(d_outputs.rows() == tape.output.rows() && d_outputs.cols() == tape.output.cols(),
               "output gradient shape mismatch");

  BatchGradients grads;
  grads.params = Vector::Zero(static_cast<Eigen::Index>(net.num_parameters()));

  // gradient with respect to the last pre-activation
  Matrix delta;
  switch (net.head()) {
    case OutputHead::linear:
      delta = d_outputs;
      break;
    case OutputHead::softmax: {
      const Matrix& y = tape.output;
      const Eigen::VectorXd inner = (d_outputs.array() * y.array()).rowwise().sum();
      delta = (y.array() * (d_outputs.colwise() - inner).array()).matrix();
      break;
    }
    case OutputHead::sigmoid_box: {
      const double width = net.box_upper() - net.box_lower();
      const Matrix s = ((tape.output.array() - net.box_lower()) / width).matrix();
      delta = (d_outputs.array() * width * s.array() * (1.0 - s.array())).matrix();
      break;
    }
  }

  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& input = tape.inputs[l];
    MatrixMap dw(grads.params.data() + net.weight_offset(l), static_cast<Eigen::Index>(net.layer_dims()[l + 1]),
                 static_cast<Eigen::Index>(net.layer_dims()[l]));
    VectorMap db(grads.params.data() + net.bias_offset(l), static_cast<Eigen::Index>(net.layer_dims()[l + 1]));
    dw.noalias() = delta.transpose() * input;
    db = delta.colwise().sum().transpose();
    Matrix d_input = delta * net.weight(l);
    if (l == 0) {
      grads.inputs = std::move(d_input);
      break;
    }
    if (!tape.masks.empty()) d_input.array() *= tape.masks[l - 1].array();
    // ReLU subgradient is 0 at a zero pre-activation
    d_input.array() *= (tape.preacts[l - 1].array() > 0.0).cast<double>();
    delta = std::move(d_input);
  }
  return grads;
}

Gradients mlp_backward(const Mlp& net, const Tape& tape, const Vector& d_output) {
  LTOF_REQUIRE(tape.output.rows() == 1, "single-sample backward needs a single-sample tape");
  BatchGradients batch = backward_batch(net, tape, Matrix(d_output.transpose()));
  return {std::move(batch.params), batch.inputs.row(0).transpose()};
}

}  // namespace ltof::nn
