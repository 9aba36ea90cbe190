#include "ltof/harness/runner.hpp"

#include "ltof/core/error.hpp"
#include "ltof/core/rng.hpp"
#include "ltof/data/dataset_io.hpp"
#include "ltof/data/nonconvex_data.hpp"
#include "ltof/data/portfolio_data.hpp"
#include "ltof/lto/infer.hpp"
#include "ltof/pto/epo_pgd.hpp"
#include "ltof/pto/epo_qp.hpp"
#include "ltof/pto/frozen_proxy.hpp"
#include "ltof/pto/predictor.hpp"
#include "ltof/pto/two_stage.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace ltof::harness {

namespace {

constexpr std::uint64_t kFeatureStream = 71;
constexpr std::uint64_t kProxyStream = 72;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

lto::TrainConfig lto_config(const ExperimentConfig& config, const std::string& method,
                            std::size_t k, std::uint64_t seed) {
  lto::TrainConfig tc;
  tc.method = lto::method_from_string(method);
  tc.mode = k == 0 ? lto::Mode::lto : lto::Mode::ltof;
  tc.lr_grid = config.lr_grid;
  tc.epochs = config.epochs;
  tc.batch_size = config.batch_size;
  tc.patience = config.patience;
  tc.seed = seed;
  tc.hidden_width = config.hidden_width;
  tc.ld = config.ld;
  tc.pdl = config.pdl;
  tc.dc3 = config.dc3;
  return tc;
}

pto::PtoConfig pto_config(const ExperimentConfig& config, std::size_t m, std::uint64_t seed,
                          std::size_t epochs) {
  pto::PtoConfig pc;
  pc.m = m;
  pc.hidden_width = config.hidden_width;
  pc.lr_grid = config.lr_grid;
  pc.epochs = epochs;
  pc.batch_size = config.batch_size;
  pc.patience = config.patience;
  pc.seed = seed;
  return pc;
}

void fill_timings(SeedResult& r) {
  r.it = r.summary.mean_infer_seconds;
  r.solve = r.summary.mean_solve_seconds;
  r.fct = r.summary.mean_restore_seconds;
  r.et = r.it + r.solve + r.fct;
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

double ReportRow::score() const {
  if (seeds == 0) return std::numeric_limits<double>::infinity();
  return std::isnan(percent_post) ? regret_post : percent_post;
}

data::Dataset make_base_dataset(const ExperimentConfig& config) {
  config.validate();
  data::Dataset base;
  if (config.problem == "portfolio") {
    base = data::gen_portfolio_dataset(config.n_samples, config.assets, config.data_seed);
  } else {
    base = data::gen_nonconvex_dataset(config.n_samples, config.nonconvex, config.data_seed,
                                       config.restarts);
  }
  const auto start = std::chrono::steady_clock::now();
  const data::TargetReport report = data::precompute_targets(base, config.threads);
  spdlog::info("{}: {} targets in {:.1f}s ({} dropped)", config.problem, report.solved,
               seconds_since(start), report.dropped);
  return base;
}

data::Dataset cell_dataset(const data::Dataset& base, const ExperimentConfig& config,
                           std::size_t k, std::uint64_t seed) {
  const std::uint64_t feature_seed = derive_seed(derive_seed(seed, kFeatureStream), k);
  return data::with_features(base, k, feature_seed, config.resolved_feature_dim());
}

lto::TrainedModel train_proxy(const data::Dataset& base, const ExperimentConfig& config,
                              std::uint64_t seed) {
  const data::Dataset identity = cell_dataset(base, config, 0, seed);
  return lto::lto_train(identity, lto_config(config, config.proxy_method, 0,
                                             derive_seed(seed, kProxyStream)));
}

SeedResult run_cell(const ExperimentConfig& config, const std::string& method, std::size_t k,
                    std::size_t m, std::uint64_t seed, const CellInputs& inputs) {
  LTOF_REQUIRE(inputs.dataset != nullptr, "cell needs a dataset");
  const data::Dataset& ds = *inputs.dataset;
  SeedResult r;
  r.method = method;
  r.k = k;
  r.m = is_lto_method(method) ? 0 : m;
  r.seed = seed;
  r.dataset_hash = data::hash_hex(data::dataset_hash(ds));
  const bool nonconvex = config.problem == "nonconvex_qp";
  try {
    if (is_lto_method(method)) {
      const lto::TrainedModel model = lto::lto_train(ds, lto_config(config, method, k, seed));
      r.summary = lto::evaluate_model(model, ds, data::Split::test);
    } else if (method == "TwoStage") {
      const pto::PredictorModel model =
          pto::two_stage_train(ds, pto_config(config, m, seed, config.baseline_epochs));
      r.summary = pto::evaluate_predictor(model, ds, data::Split::test);
      if (inputs.predictor_out) *inputs.predictor_out = model.net;
    } else if (method == "EPO") {
      const pto::PtoConfig pc = pto_config(config, m, seed, config.epo_epochs);
      const pto::PredictorModel model =
          nonconvex ? pto::epo_pgd_train(ds, pc) : pto::epo_qp_train(ds, pc);
      r.summary = pto::evaluate_predictor(model, ds, data::Split::test);
      if (inputs.predictor_out) *inputs.predictor_out = model.net;
    } else {
      LTOF_REQUIRE(inputs.proxy != nullptr, method + " needs a trained proxy");
      const pto::PtoConfig pc = pto_config(config, m, seed, config.baseline_epochs);
      pto::PredictorModel model;
      if (method == "EPO-Proxy") {
        model = pto::frozen_proxy_train(*inputs.proxy, ds, pc, false);
      } else if (inputs.pretrained != nullptr) {
        model = pto::best_predictor_over_lr(pc.lr_grid, [&](double lr) {
          return pto::frozen_proxy_train_lr(*inputs.proxy, ds, pc, lr, inputs.pretrained);
        });
      } else {
        model = pto::frozen_proxy_train(*inputs.proxy, ds, pc, true);
      }
      r.summary = pto::evaluate_frozen_proxy(model, *inputs.proxy, ds, data::Split::test);
      if (inputs.predictor_out) *inputs.predictor_out = model.net;
    }
    fill_timings(r);
    r.ok = true;
  } catch (const TrainingDivergence& e) {
    r.error = std::string("training diverged: ") + e.what();
  } catch (const SolverError& e) {
    r.error = std::string("solver failed: ") + e.what();
  } catch (const DegenerateSystem& e) {
    r.error = std::string("degenerate system: ") + e.what();
  }
  if (!r.ok) spdlog::warn("{} k={} m={} seed={} failed: {}", method, k, m, seed, r.error);
  return r;
}

ReportRow aggregate(const std::string& problem, const std::vector<SeedResult>& results) {
  LTOF_REQUIRE(!results.empty(), "nothing to aggregate");
  ReportRow row;
  row.problem = problem;
  row.method = results.front().method;
  row.k = results.front().k;
  row.m = results.front().m;
  row.min_regret_post = std::numeric_limits<double>::infinity();
  for (const SeedResult& r : results) {
    LTOF_REQUIRE(r.method == row.method && r.k == row.k && r.m == row.m,
                 "aggregated results must share method, k and m");
    if (!r.ok) {
      ++row.failed;
      if (row.error.empty()) row.error = r.error;
      continue;
    }
    const lto::EvalSummary& s = r.summary;
    ++row.seeds;
    row.percent_pre += s.mean_percent_pre;
    row.percent_post += s.mean_percent_post;
    row.regret_pre += s.mean_regret_pre;
    row.regret_post += s.mean_regret_post;
    row.min_regret_post = std::min(row.min_regret_post, s.min_regret_post);
    row.violation_pre += s.mean_violation_pre;
    row.violation_post = std::max(row.violation_post, s.max_violation_post);
    row.it += r.it;
    row.solve += r.solve;
    row.fct += r.fct;
    row.et += r.et;
  }
  if (row.seeds == 0) {
    row.status = "failed";
    row.percent_pre = row.percent_post = row.regret_pre = row.regret_post = nan();
    row.min_regret_post = row.violation_pre = row.violation_post = nan();
    row.it = row.solve = row.fct = row.et = nan();
    return row;
  }
  row.status = row.failed == 0 ? "ok" : "partial";
  const double n = static_cast<double>(row.seeds);
  for (double* v : {&row.percent_pre, &row.percent_post, &row.regret_pre, &row.regret_post,
                    &row.violation_pre, &row.it, &row.solve, &row.fct, &row.et}) {
    *v /= n;
  }
  return row;
}

std::vector<ReportRow> with_best_rows(const std::vector<ReportRow>& rows) {
  std::vector<ReportRow> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].method == rows[i].method && rows[j].k == rows[i].k &&
           !rows[j].best_of_m) {
      out.push_back(rows[j]);
      ++j;
    }
    if (j == i) {  // an existing best row: keep it as is
      out.push_back(rows[i]);
      ++i;
      continue;
    }
    const bool has_best = j < rows.size() && rows[j].best_of_m && rows[j].method == rows[i].method &&
                          rows[j].k == rows[i].k;
    if (!is_lto_method(rows[i].method) && !has_best) {
      const auto best = std::min_element(rows.begin() + static_cast<std::ptrdiff_t>(i),
                                         rows.begin() + static_cast<std::ptrdiff_t>(j),
                                         [](const ReportRow& a, const ReportRow& b) {
                                           return a.score() < b.score();
                                         });
      ReportRow b = *best;
      b.best_of_m = true;
      out.push_back(std::move(b));
    }
    i = j;
  }
  return out;
}

GridResult reproduce_grid(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  GridResult grid;
  grid.config = config;
  const data::Dataset base = make_base_dataset(config);
  grid.base_hash = data::hash_hex(data::dataset_hash(base));

  std::vector<std::string> lto_methods;
  std::vector<std::string> baselines;
  for (const std::string& m : config.methods) {
    (is_lto_method(m) ? lto_methods : baselines).push_back(m);
  }
  const bool needs_proxy = std::any_of(baselines.begin(), baselines.end(), [](const auto& m) {
    return m == "EPO-Proxy" || m == "EPO-Proxy-Pretrained";
  });
  // Two-stage runs first so the pretrained variant can reuse its predictors.
  std::stable_sort(baselines.begin(), baselines.end(), [](const auto& a, const auto& b) {
    return (a == "TwoStage") > (b == "TwoStage");
  });
  std::vector<std::size_t> ks;
  if (config.lto_reference && !lto_methods.empty()) ks.push_back(0);
  for (std::size_t k : config.ks) {
    if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
  }

  // One job per seed; results land in per-seed slots so the output does not
  // depend on the worker count.
  std::vector<std::vector<SeedResult>> per_seed(config.seeds.size());
  auto run_seed = [&](std::size_t s) {
    const std::uint64_t seed = config.seeds[s];
    std::optional<lto::TrainedModel> proxy;
    std::string proxy_error;
    if (needs_proxy) {
      try {
        proxy = train_proxy(base, config, seed);
      } catch (const TrainingDivergence& e) {
        proxy_error = std::string("proxy training diverged: ") + e.what();
      }
    }
    for (std::size_t k : ks) {
      const data::Dataset ds = cell_dataset(base, config, k, seed);
      CellInputs inputs{&ds, proxy ? &*proxy : nullptr, nullptr};
      for (const std::string& method : lto_methods) {
        const auto t0 = std::chrono::steady_clock::now();
        per_seed[s].push_back(run_cell(config, method, k, 0, seed, inputs));
        spdlog::info("seed {} k {} {}: {:.1f}s", seed, k, method, seconds_since(t0));
      }
      if (k == 0) continue;
      std::map<std::size_t, nn::Mlp> two_stage_nets;
      for (const std::string& method : baselines) {
        for (std::size_t m : config.ms) {
          const auto t0 = std::chrono::steady_clock::now();
          SeedResult r;
          if (!proxy && (method == "EPO-Proxy" || method == "EPO-Proxy-Pretrained")) {
            r.method = method;
            r.k = k;
            r.m = m;
            r.seed = seed;
            r.error = proxy_error;
          } else {
            const auto it = two_stage_nets.find(m);
            CellInputs cell = inputs;
            cell.pretrained = it == two_stage_nets.end() ? nullptr : &it->second;
            // Keep two-stage predictors for the pretrained frozen-proxy variant.
            nn::Mlp trained;
            if (method == "TwoStage") cell.predictor_out = &trained;
            r = run_cell(config, method, k, m, seed, cell);
            if (method == "TwoStage" && r.ok) two_stage_nets.emplace(m, std::move(trained));
          }
          spdlog::info("seed {} k {} {} m {}: {:.1f}s", seed, k, method, m, seconds_since(t0));
          per_seed[s].push_back(std::move(r));
        }
      }
    }
  };

  const std::size_t workers = std::min(config.threads, config.seeds.size());
  if (workers <= 1) {
    for (std::size_t s = 0; s < config.seeds.size(); ++s) run_seed(s);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t s = next++; s < config.seeds.size(); s = next++) {
            try {
              run_seed(s);
            } catch (...) {
              std::lock_guard lock(error_mutex);
              if (!first_error) first_error = std::current_exception();
            }
          }
        });
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  }

  // Group by (method, k, m) in first-seen order.
  std::vector<std::vector<SeedResult>> groups;
  for (const auto& seed_results : per_seed) {
    for (const SeedResult& r : seed_results) {
      grid.seed_results.push_back(r);
      auto g = std::find_if(groups.begin(), groups.end(), [&](const auto& group) {
        const SeedResult& f = group.front();
        return f.method == r.method && f.k == r.k && f.m == r.m;
      });
      if (g == groups.end()) {
        groups.push_back({r});
      } else {
        g->push_back(r);
      }
    }
  }
  std::vector<ReportRow> rows;
  for (const auto& group : groups) rows.push_back(aggregate(config.problem, group));
  grid.rows = with_best_rows(rows);
  grid.seconds = seconds_since(start);
  return grid;
}

}  // namespace ltof::harness
