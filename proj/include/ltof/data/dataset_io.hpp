#pragma once

#include "ltof/data/dataset.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace ltof::data {

inline constexpr const char* kDatasetFormat = "ltof-dataset";
inline constexpr int kDatasetVersion = 1;

nlohmann::json dataset_to_json(const Dataset& dataset);
/// Throws ParseError naming the offending field on malformed input.
Dataset dataset_from_json(const nlohmann::json& j);

/// 64-bit FNV-1a hash of the canonical serialization (sorted keys, shortest
/// round-trip doubles).
std::uint64_t dataset_hash(const Dataset& dataset);
std::string hash_hex(std::uint64_t hash);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
/// Throws ParseError with the line number on malformed JSON.
Dataset load_dataset(const std::filesystem::path& path);

/// Columns: sample_id, split, z0.., zeta0.., xstar0.. (xstar omitted without targets).
void export_csv(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace ltof::data
