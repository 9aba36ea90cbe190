#pragma once

#include "ltof/nn/mlp.hpp"

#include <json.hpp>

#include <filesystem>

namespace ltof::nn {

/// JSON document with layer_dims, head tag and per-layer row-major weight and
/// bias arrays. Doubles are written with round-trip precision.
nlohmann::json to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);

void save_checkpoint(const Mlp& net, const std::filesystem::path& path);
Mlp load_checkpoint(const std::filesystem::path& path);

}  // namespace ltof::nn
