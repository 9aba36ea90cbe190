#include "ltof/nn/checkpoint.hpp"

#include "ltof/core/error.hpp"
#include "ltof/core/json_util.hpp"

#include <fstream>

namespace ltof::nn {

nlohmann::json to_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    layers.push_back({{"weight", json_util::matrix_to_json(net.weight(l))},
                      {"bias", json_util::vector_to_json(net.bias(l))}});
  }
  nlohmann::json j = {{"layer_dims", net.layer_dims()},
                      {"head", to_string(net.head())},
                      {"layers", std::move(layers)}};
  if (net.head() == OutputHead::sigmoid_box) {
    j["box"] = {net.box_lower(), net.box_upper()};
  }
  return j;
}

Mlp mlp_from_json(const nlohmann::json& j) {
  const std::string ctx = "mlp";
  const auto& dims_json = json_util::field(j, "layer_dims", ctx);
  if (!dims_json.is_array() || dims_json.size() < 2) {
    throw ParseError("mlp.layer_dims: expected at least two dimensions");
  }
  const IndexList dims = json_util::indices_from_json(dims_json, "mlp.layer_dims");
  const auto& head_json = json_util::field(j, "head", ctx);
  if (!head_json.is_string()) throw ParseError("mlp.head: expected a string");
  OutputHead head;
  try {
    head = output_head_from_string(head_json.get<std::string>());
  } catch (const ContractViolation& e) {
    throw ParseError(std::string("mlp.head: ") + e.what());
  }
  double lo = 0.0;
  double hi = 1.0;
  if (j.contains("box")) {
    const Vector box = json_util::vector_from_json(j.at("box"), "mlp.box");
    if (box.size() != 2) throw ParseError("mlp.box: expected [lower, upper]");
    lo = box[0];
    hi = box[1];
  }
  Mlp net(dims, head, lo, hi);
  const auto& layers = json_util::field(j, "layers", ctx);
  if (!layers.is_array() || layers.size() != net.num_layers()) {
    throw ParseError("mlp.layers: expected " + std::to_string(net.num_layers()) + " layers");
  }
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const std::string lctx = "mlp.layers[" + std::to_string(l) + "]";
    const Matrix w = json_util::matrix_from_json(json_util::field(layers[l], "weight", lctx), lctx + ".weight");
    const Vector b = json_util::vector_from_json(json_util::field(layers[l], "bias", lctx), lctx + ".bias");
    if (static_cast<std::size_t>(w.rows()) != dims[l + 1] || static_cast<std::size_t>(w.cols()) != dims[l]) {
      throw ParseError(lctx + ".weight: shape does not match layer_dims");
    }
    if (static_cast<std::size_t>(b.size()) != dims[l + 1]) {
      throw ParseError(lctx + ".bias: length does not match layer_dims");
    }
    net.weight(l) = w;
    net.bias(l) = b;
  }
  return net;
}

void save_checkpoint(const Mlp& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
  out << to_json(net).dump(1) << '\n';
}

Mlp load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return mlp_from_json(j);
}

}  // namespace ltof::nn
