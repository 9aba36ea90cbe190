#pragma once

#include "ltof/lto/common.hpp"

#include <json.hpp>

#include <filesystem>

namespace ltof::lto {

/// Method state stored next to the network checkpoint: mode, input
/// standardizer, multipliers, rho, dual network, DC3 partition and history.
nlohmann::json sidecar_to_json(const TrainedModel& model);

/// Writes <dir>/net.json (network checkpoint) and <dir>/state.json (sidecar).
void save_model(const TrainedModel& model, const std::filesystem::path& dir);
/// Throws ParseError on missing or malformed files.
TrainedModel load_model(const std::filesystem::path& dir);

}  // namespace ltof::lto
