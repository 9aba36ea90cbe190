#include "ltof/data/dataset_io.hpp"

#include "ltof/core/error.hpp"
#include "ltof/core/json_util.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ltof::data {

namespace {

nlohmann::json indices_to_json(const IndexList& idx) { return nlohmann::json(idx); }

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

nlohmann::json dataset_to_json(const Dataset& ds) {
  ds.validate();
  using namespace json_util;
  return {{"format", kDatasetFormat},
          {"version", kDatasetVersion},
          {"meta",
           {{"problem", ds.problem->tag()},
            {"k", ds.k},
            {"seed", ds.seed},
            {"feature_seed", ds.feature_seed},
            {"generator", ds.generator}}},
          {"problem", ds.problem->to_json()},
          {"splits",
           {{"train", indices_to_json(ds.splits.train)},
            {"val", indices_to_json(ds.splits.val)},
            {"test", indices_to_json(ds.splits.test)}}},
          {"z", matrix_to_json(ds.z)},
          {"zeta", matrix_to_json(ds.zeta)},
          {"x_star", matrix_to_json(ds.x_star)}};
}

Dataset dataset_from_json(const nlohmann::json& j) {
  using namespace json_util;
  const auto& format = field(j, "format", "dataset");
  if (!format.is_string() || format.get<std::string>() != kDatasetFormat) {
    throw ParseError("dataset.format: expected '" + std::string(kDatasetFormat) + "'");
  }
  const auto& version = field(j, "version", "dataset");
  if (!version.is_number_integer() || version.get<int>() != kDatasetVersion) {
    throw ParseError("dataset.version: unsupported version " + version.dump() + " (expected " +
                     std::to_string(kDatasetVersion) + ")");
  }
  Dataset ds;
  const auto& meta = field(j, "meta", "dataset");
  auto unsigned_field = [&](const char* name) {
    const auto& v = field(meta, name, "dataset.meta");
    if (!v.is_number_unsigned()) {
      throw ParseError(std::string("dataset.meta.") + name + ": expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  };
  ds.k = static_cast<std::size_t>(unsigned_field("k"));
  ds.seed = unsigned_field("seed");
  ds.feature_seed = unsigned_field("feature_seed");
  ds.generator = field(meta, "generator", "dataset.meta");
  ds.problem = problems::problem_from_json(field(j, "problem", "dataset"));
  const auto& splits = field(j, "splits", "dataset");
  ds.splits.train = indices_from_json(field(splits, "train", "dataset.splits"), "dataset.splits.train");
  ds.splits.val = indices_from_json(field(splits, "val", "dataset.splits"), "dataset.splits.val");
  ds.splits.test = indices_from_json(field(splits, "test", "dataset.splits"), "dataset.splits.test");
  ds.zeta = matrix_from_json(field(j, "zeta", "dataset"), "dataset.zeta",
                             static_cast<Eigen::Index>(ds.problem->n_param()));
  ds.z = matrix_from_json(field(j, "z", "dataset"), "dataset.z");
  ds.x_star = matrix_from_json(field(j, "x_star", "dataset"), "dataset.x_star",
                               static_cast<Eigen::Index>(ds.problem->n_decision()));
  try {
    ds.validate();
  } catch (const ContractViolation& e) {
    throw ParseError(std::string("dataset: inconsistent contents: ") + e.what());
  }
  return ds;
}

std::uint64_t dataset_hash(const Dataset& dataset) { return fnv1a(dataset_to_json(dataset).dump()); }

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
  out << dataset_to_json(dataset).dump(1) << '\n';
  if (!out) throw ParseError("failed writing '" + path.string() + "'");
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ParseError(path.string() + ":" + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
  try {
    return dataset_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void export_csv(const Dataset& ds, const std::filesystem::path& path) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
  std::vector<std::string> split_of(ds.size());
  for (Split s : {Split::train, Split::val, Split::test}) {
    for (std::size_t i : ds.splits.of(s)) split_of[i] = to_string(s);
  }
  out << "sample_id,split";
  for (Eigen::Index c = 0; c < ds.z.cols(); ++c) out << ",z" << c;
  for (Eigen::Index c = 0; c < ds.zeta.cols(); ++c) out << ",zeta" << c;
  if (ds.has_targets()) {
    for (Eigen::Index c = 0; c < ds.x_star.cols(); ++c) out << ",xstar" << c;
  }
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << i << ',' << split_of[i];
    for (Eigen::Index c = 0; c < ds.z.cols(); ++c) out << ',' << format_double(ds.z(r, c));
    for (Eigen::Index c = 0; c < ds.zeta.cols(); ++c) out << ',' << format_double(ds.zeta(r, c));
    if (ds.has_targets()) {
      for (Eigen::Index c = 0; c < ds.x_star.cols(); ++c) out << ',' << format_double(ds.x_star(r, c));
    }
    out << '\n';
  }
}

}  // namespace ltof::data
