// Command-line front end: dataset generation, proxy training and evaluation,
// the toy shift probe and full grid reproduction.
#include "ltof/core/error.hpp"
#include "ltof/data/dataset_io.hpp"
#include "ltof/harness/config.hpp"
#include "ltof/harness/report.hpp"
#include "ltof/harness/runner.hpp"
#include "ltof/lto/infer.hpp"
#include "ltof/lto/model_io.hpp"
#include "ltof/pto/shift_probe.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace ltof;

namespace {

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(item, &pos);
    if (pos != item.size()) throw CLI::ValidationError("--k", "not an integer list: " + text);
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw CLI::ValidationError("--k", "empty list");
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) out.push_back(item);
  return out;
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ltof::ParseError("cannot open '" + path.string() + "' for writing");
  out << j.dump(1) << '\n';
}

nlohmann::json summary_to_json(const lto::EvalSummary& s) {
  return {{"samples", s.samples},
          {"mean_regret_pre", s.mean_regret_pre},
          {"mean_percent_pre", std::isfinite(s.mean_percent_pre) ? nlohmann::json(s.mean_percent_pre) : nlohmann::json()},
          {"mean_regret_post", s.mean_regret_post},
          {"mean_percent_post", std::isfinite(s.mean_percent_post) ? nlohmann::json(s.mean_percent_post) : nlohmann::json()},
          {"min_regret_post", s.min_regret_post},
          {"mean_violation_pre", s.mean_violation_pre},
          {"max_violation_post", s.max_violation_post},
          {"restore_failures", s.restore_failures},
          {"it", s.mean_infer_seconds},
          {"fct", s.mean_restore_seconds}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning to optimize from features: data, training and experiment grids"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "Log verbosity")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  const std::vector<std::string> problems{"portfolio", "nonconvex_qp"};
  const std::vector<std::string> proxy_methods{"LD", "PDL", "DC3"};

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a dataset with targets and features of complexity k");
  std::string gen_problem = "portfolio";
  std::size_t gen_k = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  std::string gen_config;
  std::string gen_csv;
  std::size_t gen_samples = 0;
  gen->add_option("--problem", gen_problem, "Problem")->check(CLI::IsMember(problems));
  gen->add_option("--k", gen_k, "Feature complexity (0: identity features)");
  gen->add_option("--seed", gen_seed, "Feature seed");
  gen->add_option("--samples", gen_samples, "Number of samples (default from config)");
  gen->add_option("--config", gen_config, "Experiment config JSON for dimensions and data seed");
  gen->add_option("--csv", gen_csv, "Also export a CSV");
  gen->add_option("--out", gen_out, "Output dataset JSON")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a proxy (LtO for k = 0 datasets, LtOF otherwise)");
  std::string train_data;
  std::string train_method = "LD";
  std::uint64_t train_seed = 0;
  std::string train_out;
  std::string train_config;
  train->add_option("--dataset", train_data, "Dataset JSON from gen-data")->required();
  train->add_option("--method", train_method, "Proxy method")->check(CLI::IsMember(proxy_methods));
  train->add_option("--seed", train_seed, "Training seed");
  train->add_option("--config", train_config, "Experiment config JSON for hyperparameters");
  train->add_option("--out", train_out, "Model directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a trained proxy on a dataset split");
  std::string eval_model;
  std::string eval_data;
  std::string eval_split = "test";
  std::string eval_out;
  eval->add_option("--model", eval_model, "Model directory from train")->required();
  eval->add_option("--dataset", eval_data, "Dataset JSON")->required();
  eval->add_option("--split", eval_split, "Split")->check(CLI::IsMember({"train", "val", "test"}));
  eval->add_option("--out", eval_out, "Summary JSON (default: stdout)");

  // shift-probe
  auto* shift = app.add_subcommand("shift-probe", "Probe a 2D toy proxy on scaled inputs");
  std::string shift_method = "LD";
  std::uint64_t shift_seed = 0;
  std::string shift_out = "shift_probe.csv";
  std::size_t shift_epochs = 200;
  shift->add_option("--method", shift_method, "Proxy method")->check(CLI::IsMember(proxy_methods));
  shift->add_option("--seed", shift_seed, "Seed");
  shift->add_option("--epochs", shift_epochs, "Proxy training epochs");
  shift->add_option("--out", shift_out, "Output CSV");

  // reproduce
  auto* repro = app.add_subcommand("reproduce", "Run a (method x k x m) grid and write the report");
  std::string repro_config;
  std::string repro_problem;
  std::string repro_k;
  std::string repro_methods;
  std::string repro_seeds;
  std::string repro_out;
  std::size_t repro_threads = 0;
  bool strict = false;
  std::string rerender;
  repro->add_option("--config", repro_config, "Experiment config JSON");
  repro->add_option("--problem", repro_problem, "Problem")->check(CLI::IsMember(problems));
  repro->add_option("--k", repro_k, "Comma-separated feature complexities");
  repro->add_option("--method", repro_methods, "Comma-separated methods (" + join(harness::known_methods()) + ")");
  repro->add_option("--seed", repro_seeds, "Comma-separated seeds");
  repro->add_option("--threads", repro_threads, "Worker threads");
  repro->add_option("--out", repro_out, "Output directory");
  repro->add_option("--from-rows", rerender, "Re-render a report from a stored rows.json");
  repro->add_flag("--strict", strict, "Exit nonzero when any row failed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*gen) {
      harness::ExperimentConfig config;
      if (!gen_config.empty()) config = harness::load_config(gen_config);
      if (gen->count("--problem") || gen_config.empty()) config.problem = gen_problem;
      if (gen_samples > 0) config.n_samples = gen_samples;
      config.validate();
      const data::Dataset base = harness::make_base_dataset(config);
      const data::Dataset ds = harness::cell_dataset(base, config, gen_k, gen_seed);
      data::save_dataset(ds, gen_out);
      if (!gen_csv.empty()) data::export_csv(ds, gen_csv);
      std::cout << gen_out << " " << ds.size() << " samples, hash "
                << data::hash_hex(data::dataset_hash(ds)) << '\n';
    } else if (*train) {
      const data::Dataset ds = data::load_dataset(train_data);
      harness::ExperimentConfig config;
      if (!train_config.empty()) config = harness::load_config(train_config);
      lto::TrainConfig tc;
      tc.method = lto::method_from_string(train_method);
      tc.mode = ds.k == 0 ? lto::Mode::lto : lto::Mode::ltof;
      tc.lr_grid = config.lr_grid;
      tc.epochs = config.epochs;
      tc.batch_size = config.batch_size;
      tc.patience = config.patience;
      tc.hidden_width = config.hidden_width;
      tc.seed = train_seed;
      tc.ld = config.ld;
      tc.pdl = config.pdl;
      tc.dc3 = config.dc3;
      const lto::TrainedModel model = lto::lto_train(ds, tc);
      lto::save_model(model, train_out);
      std::cout << train_out << " best epoch " << model.best_epoch << ", val score "
                << model.best_val_score << '\n';
    } else if (*eval) {
      const lto::TrainedModel model = lto::load_model(eval_model);
      const data::Dataset ds = data::load_dataset(eval_data);
      const data::Split split = eval_split == "train" ? data::Split::train
                                : eval_split == "val" ? data::Split::val
                                                      : data::Split::test;
      const nlohmann::json j = summary_to_json(lto::evaluate_model(model, ds, split));
      if (eval_out.empty()) {
        std::cout << j.dump(1) << '\n';
      } else {
        write_json(eval_out, j);
      }
    } else if (*shift) {
      pto::ShiftProbeConfig sc;
      sc.seed = shift_seed;
      sc.proxy.method = lto::method_from_string(shift_method);
      sc.proxy.epochs = shift_epochs;
      sc.proxy.seed = shift_seed;
      const pto::ShiftProbeRun run = pto::run_toy_shift_probe(sc);
      pto::write_shift_csv(run.report, shift_out);
      std::cout << shift_out << '\n';
    } else if (*repro) {
      if (!rerender.empty()) {
        const harness::ReportInput input = harness::load_rows(rerender);
        const fs::path dir = repro_out.empty() ? fs::path(rerender).parent_path() : fs::path(repro_out);
        for (const auto& p : harness::write_report(input, dir)) std::cout << p.string() << '\n';
        return 0;
      }
      harness::ExperimentConfig config;
      if (!repro_config.empty()) config = harness::load_config(repro_config);
      if (!repro_problem.empty()) config.problem = repro_problem;
      if (!repro_k.empty()) config.ks = parse_list(repro_k);
      if (!repro_methods.empty()) config.methods = split_names(repro_methods);
      if (!repro_seeds.empty()) {
        config.seeds.clear();
        for (std::size_t s : parse_list(repro_seeds)) config.seeds.push_back(s);
      }
      if (repro_threads > 0) config.threads = repro_threads;
      if (!repro_out.empty()) config.output_dir = repro_out;
      config.validate();  // unknown methods are reported with the valid set
      const harness::GridResult grid = harness::reproduce_grid(config);
      const harness::ReportInput input = harness::report_input(grid);
      for (const auto& p : harness::write_report(input, config.output_dir)) {
        std::cout << p.string() << '\n';
      }
      std::size_t failed = 0;
      for (const auto& row : grid.rows) {
        if (row.status != "ok") {
          ++failed;
          std::cerr << "row " << row.method << " k=" << row.k << " m=" << row.m << " "
                    << row.status << ": " << row.error << '\n';
        }
      }
      std::cout << grid.rows.size() << " rows, " << failed << " with failures, "
                << grid.seconds << "s\n";
      if (strict && failed > 0) return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
