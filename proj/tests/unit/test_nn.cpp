#include "ltof/core/error.hpp"
#include "ltof/nn/adam.hpp"
#include "ltof/nn/checkpoint.hpp"
#include "ltof/nn/mlp.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>

using namespace ltof;
using namespace ltof::nn;

TEST_CASE("seeded two-layer forward pass matches the recorded golden output") {
  // Golden computed once with numpy from the weights of mlp_init({3,4,2}, seed 0).
  const Mlp net = mlp_init({3, 4, 2}, OutputHead::linear, 0);
  Vector x(3);
  x << 0.5, -1.0, 2.0;
  const Vector y = mlp_forward(net, x).y;
  CHECK(y[0] == doctest::Approx(-0.4426119065178161).epsilon(1e-14));
  CHECK(y[1] == doctest::Approx(-0.6554628720907456).epsilon(1e-14));
}

TEST_CASE("hand-set weights give the hand-computed output") {
  Mlp net({2, 2, 1}, OutputHead::linear);
  net.weight(0) << 1.0, -1.0, 2.0, 0.5;
  net.bias(0) << 0.0, -3.0;
  net.weight(1) << 2.0, 1.0;
  net.bias(1) << 0.25;
  Vector x(2);
  x << 1.0, 2.0;
  // hidden = relu([-1, -2]) = 0, output = 0.25
  CHECK(mlp_forward(net, x).y[0] == 0.25);
  x << 3.0, 1.0;
  // hidden = relu([2, 3.5]) -> 2*2 + 3.5 + 0.25
  CHECK(mlp_forward(net, x).y[0] == doctest::Approx(7.75));
}

TEST_CASE("ReLU subgradient at zero is zero") {
  Mlp net({1, 1, 1}, OutputHead::linear);
  net.weight(0)(0, 0) = 1.0;
  net.bias(0)[0] = 0.0;
  net.weight(1)(0, 0) = 1.0;
  Vector x = Vector::Zero(1);
  const ForwardResult fr = mlp_forward(net, x);
  const Gradients g = mlp_backward(net, fr.tape, Vector::Ones(1));
  CHECK(g.input[0] == 0.0);
}

TEST_CASE("backprop matches central differences on random three-layer nets") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    for (OutputHead head : {OutputHead::linear, OutputHead::softmax, OutputHead::sigmoid_box}) {
      const Mlp net = mlp_init({4, 6, 5, 3}, head, 100 + trial);
      const Matrix X = test::random_matrix(rng, 3, 4);
      const Matrix W = test::random_matrix(rng, 3, 3);
      auto loss = [&](const Mlp& n, const Matrix& in) {
        return (forward_batch(n, in).array() * W.array()).sum();
      };
      Tape tape;
      forward_batch(net, X, &tape);
      const BatchGradients g = backward_batch(net, tape, W);
      const Vector fd_params = test::central_gradient(
          [&](const Vector& p) {
            Mlp copy = net;
            copy.mutable_parameters() = p;
            return loss(copy, X);
          },
          net.parameters());
      CHECK(test::rel_error(g.params, fd_params) < 1e-4);
      const Vector flat_x = Eigen::Map<const Vector>(X.data(), X.size());
      const Vector fd_inputs = test::central_gradient(
          [&](const Vector& v) { return loss(net, Eigen::Map<const Matrix>(v.data(), 3, 4)); },
          flat_x);
      const Vector g_inputs = Eigen::Map<const Vector>(g.inputs.data(), g.inputs.size());
      CHECK(test::rel_error(g_inputs, fd_inputs) < 1e-4);
    }
  }
}

TEST_CASE("output heads respect their ranges") {
  const Matrix X = Matrix::Random(5, 3) * 10.0;
  const Matrix s = forward_batch(mlp_init({3, 4, 6}, OutputHead::softmax, 1), X);
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    CHECK(s.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.row(i).minCoeff() >= 0.0);
  }
  const Matrix b = forward_batch(mlp_init({3, 4, 6}, OutputHead::sigmoid_box, 1), X);
  CHECK(b.minCoeff() >= 0.0);
  CHECK(b.maxCoeff() <= 1.0);
}

TEST_CASE("stale tapes are rejected after a parameter change") {
  Mlp net = mlp_init({2, 3, 1}, OutputHead::linear, 4);
  Tape tape;
  forward_batch(net, Matrix::Ones(1, 2), &tape);
  net.mutable_parameters()[0] += 1.0;
  CHECK_THROWS_AS(backward_batch(net, tape, Matrix::Ones(1, 1)), ContractViolation);
}

TEST_CASE("shape mismatches are contract violations") {
  const Mlp net = mlp_init({2, 3, 1}, OutputHead::linear, 4);
  CHECK_THROWS_AS(forward_batch(net, Matrix::Ones(1, 3)), ContractViolation);
}

TEST_CASE("initialization is reproducible and bounded by the fan-in") {
  const Mlp a = mlp_init({5, 8, 2}, OutputHead::linear, 9);
  const Mlp b = mlp_init({5, 8, 2}, OutputHead::linear, 9);
  CHECK(a.parameters() == b.parameters());
  CHECK(a.parameters() != mlp_init({5, 8, 2}, OutputHead::linear, 10).parameters());
  CHECK(a.weight(0).cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(5.0));
  CHECK(a.weight(1).cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(8.0));
}

TEST_CASE("dropout is inverted and off by default") {
  const Mlp net = mlp_init({3, 50, 1}, OutputHead::linear, 2);
  const Matrix X = Matrix::Ones(2, 3);
  Rng rng(3);
  Tape tape;
  forward_batch(net, X, &tape, DropoutConfig{0.5, &rng});
  const Matrix& mask = tape.masks.at(0);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    const double v = mask.data()[i];
    CHECK((v == 0.0 || v == 2.0));
  }
  Tape plain;
  forward_batch(net, X, &plain);
  CHECK(plain.masks.empty());
}

TEST_CASE("Adam descends a scalar quadratic") {
  Vector w = Vector::Ones(1);
  AdamState state(1);
  for (int i = 0; i < 100; ++i) adam_step(state, w, 2.0 * w, 0.05);
  CHECK(std::abs(w[0]) < 0.1);
}

TEST_CASE("Adam rejects non-finite gradients and leaves parameters untouched") {
  Vector w = Vector::Ones(2);
  AdamState state(2);
  Vector g(2);
  g << 1.0, std::nan("");
  CHECK_THROWS_AS(adam_step(state, w, g, 0.1), TrainingDivergence);
  CHECK(w == Vector::Ones(2));
}

TEST_CASE("checkpoints round-trip bit for bit and malformed files name the field") {
  const Mlp net = mlp_init({3, 7, 2}, OutputHead::sigmoid_box, 5);
  const Mlp back = mlp_from_json(to_json(net));
  CHECK(back.parameters() == net.parameters());
  CHECK(back.layer_dims() == net.layer_dims());
  CHECK(back.head() == net.head());

  const auto path = std::filesystem::temp_directory_path() / "ltof_nn_ckpt.json";
  save_checkpoint(net, path);
  CHECK(load_checkpoint(path).parameters() == net.parameters());

  nlohmann::json bad = to_json(net);
  bad["layers"][0]["bias"] = {1.0};
  CHECK_THROWS_WITH_AS(mlp_from_json(bad), doctest::Contains("mlp.layers[0].bias"), ParseError);
  bad = to_json(net);
  bad["head"] = "tanh";
  CHECK_THROWS_AS(mlp_from_json(bad), ParseError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/net.json"), ParseError);
}
