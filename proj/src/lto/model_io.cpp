#include "ltof/lto/model_io.hpp"

#include "ltof/core/error.hpp"
#include "ltof/core/json_util.hpp"
#include "ltof/nn/checkpoint.hpp"

#include <fstream>

namespace ltof::lto {

namespace {

constexpr const char* kStateFormat = "ltof-model-state";
constexpr int kStateVersion = 1;

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::size_t unsigned_field(const nlohmann::json& j, const char* name) {
  const auto& v = json_util::field(j, name, "state");
  if (!v.is_number_unsigned()) throw ParseError(std::string("state.") + name + ": expected a nonnegative integer");
  return v.get<std::size_t>();
}

}  // namespace

nlohmann::json sidecar_to_json(const TrainedModel& model) {
  using namespace json_util;
  nlohmann::json history = nlohmann::json::array();
  for (const EpochRecord& r : model.history) {
    history.push_back({{"epoch", r.epoch},
                       {"train_loss", r.train_loss},
                       {"val_score", r.val_score},
                       {"val_violation", r.val_violation}});
  }
  nlohmann::json j = {{"format", kStateFormat},
                      {"version", kStateVersion},
                      {"method", to_string(model.method)},
                      {"mode", to_string(model.mode)},
                      {"k", model.k},
                      {"scaler", to_json(model.scaler)},
                      {"lr", model.lr},
                      {"best_epoch", model.best_epoch},
                      {"best_val_score", model.best_val_score},
                      {"history", history},
                      {"ld_lambda", vector_to_json(model.ld_lambda)},
                      {"ld_mu", vector_to_json(model.ld_mu)},
                      {"pdl_rho", model.pdl_rho}};
  if (model.dual_net) j["dual_net"] = nn::to_json(*model.dual_net);
  if (model.dc3) {
    const Dc3Completion& c = *model.dc3;
    j["dc3"] = {{"partial", c.partial}, {"completed", c.completed}, {"Z", matrix_to_json(c.Z)},
                {"x0", vector_to_json(c.x0)}, {"G", matrix_to_json(c.G)},
                {"h", vector_to_json(c.h)}, {"step", c.step}, {"t_test", model.t_test}};
  }
  return j;
}

void save_model(const TrainedModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nn::save_checkpoint(model.net, dir / "net.json");
  std::ofstream out(dir / "state.json");
  if (!out) throw ParseError("cannot open '" + (dir / "state.json").string() + "' for writing");
  out << sidecar_to_json(model).dump(1) << '\n';
}

TrainedModel load_model(const std::filesystem::path& dir) {
  using namespace json_util;
  TrainedModel model;
  model.net = nn::load_checkpoint(dir / "net.json");
  const nlohmann::json j = read_json(dir / "state.json");
  const auto& format = field(j, "format", "state");
  if (!format.is_string() || format.get<std::string>() != kStateFormat) {
    throw ParseError("state.format: expected '" + std::string(kStateFormat) + "'");
  }
  const auto& version = field(j, "version", "state");
  if (!version.is_number_integer() || version.get<int>() != kStateVersion) {
    throw ParseError("state.version: unsupported version " + version.dump());
  }
  try {
    model.method = method_from_string(field(j, "method", "state").get<std::string>());
    model.mode = mode_from_string(field(j, "mode", "state").get<std::string>());
  } catch (const ContractViolation& e) {
    throw ParseError(std::string("state: ") + e.what());
  } catch (const nlohmann::json::type_error& e) {
    throw ParseError(std::string("state.method/mode: ") + e.what());
  }
  model.k = unsigned_field(j, "k");
  model.scaler = standardizer_from_json(field(j, "scaler", "state"));
  model.lr = number(field(j, "lr", "state"), "state.lr");
  model.best_epoch = unsigned_field(j, "best_epoch");
  model.best_val_score = number(field(j, "best_val_score", "state"), "state.best_val_score");
  model.ld_lambda = vector_from_json(field(j, "ld_lambda", "state"), "state.ld_lambda");
  model.ld_mu = vector_from_json(field(j, "ld_mu", "state"), "state.ld_mu");
  model.pdl_rho = number(field(j, "pdl_rho", "state"), "state.pdl_rho");
  for (const auto& r : field(j, "history", "state")) {
    EpochRecord rec;
    rec.epoch = r.value("epoch", std::size_t{0});
    rec.train_loss = number(field(r, "train_loss", "state.history"), "state.history.train_loss");
    rec.val_score = number(field(r, "val_score", "state.history"), "state.history.val_score");
    rec.val_violation = number(field(r, "val_violation", "state.history"), "state.history.val_violation");
    model.history.push_back(rec);
  }
  if (j.contains("dual_net")) model.dual_net = nn::mlp_from_json(j.at("dual_net"));
  if (j.contains("dc3")) {
    const auto& d = j.at("dc3");
    Dc3Completion c;
    c.partial = indices_from_json(field(d, "partial", "state.dc3"), "state.dc3.partial");
    c.completed = indices_from_json(field(d, "completed", "state.dc3"), "state.dc3.completed");
    c.Z = matrix_from_json(field(d, "Z", "state.dc3"), "state.dc3.Z");
    c.x0 = vector_from_json(field(d, "x0", "state.dc3"), "state.dc3.x0");
    c.G = matrix_from_json(field(d, "G", "state.dc3"), "state.dc3.G", c.Z.rows());
    c.h = vector_from_json(field(d, "h", "state.dc3"), "state.dc3.h");
    c.step = number(field(d, "step", "state.dc3"), "state.dc3.step");
    c.ZZt = c.Z * c.Z.transpose();
    model.t_test = unsigned_field(d, "t_test");
    model.dc3 = std::move(c);
  }
  if (model.scaler.dim() != model.net.input_dim()) {
    throw ParseError("state.scaler: dimension does not match the network input");
  }
  return model;
}

}  // namespace ltof::lto
