#include "ltof/pto/predictor.hpp"

#include "ltof/core/error.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <optional>

namespace ltof::pto {

std::string to_string(Baseline baseline) {
  switch (baseline) {
    case Baseline::two_stage:
      return "TwoStage";
    case Baseline::epo:
      return "EPO";
    case Baseline::frozen_proxy:
      return "EPO-Proxy";
    case Baseline::frozen_proxy_pretrained:
      return "EPO-Proxy-Pretrained";
  }
  return "unknown";
}

Baseline baseline_from_string(const std::string& name) {
  for (Baseline b : {Baseline::two_stage, Baseline::epo, Baseline::frozen_proxy,
                     Baseline::frozen_proxy_pretrained}) {
    if (name == to_string(b)) return b;
  }
  throw ContractViolation("unknown baseline '" + name +
                          "' (valid: TwoStage, EPO, EPO-Proxy, EPO-Proxy-Pretrained)");
}

Matrix predict_params(const PredictorModel& model, const Matrix& raw_features) {
  LTOF_REQUIRE(static_cast<std::size_t>(raw_features.cols()) == model.net.input_dim(),
               "feature width does not match the predictor");
  return nn::forward_batch(model.net, model.scaler.apply(raw_features));
}

nn::Mlp init_predictor(std::size_t input_dim, std::size_t output_dim, const PtoConfig& config,
                       std::uint64_t stream) {
  LTOF_REQUIRE(config.m >= 1, "the predictor needs at least one hidden layer");
  return nn::mlp_init(nn::layer_dims_for(input_dim, config.hidden_width, config.m, output_dim),
                      nn::OutputHead::linear, derive_seed(config.seed, stream));
}

PredictorModel best_predictor_over_lr(const std::vector<double>& lr_grid,
                                      const std::function<PredictorModel(double lr)>& train_one) {
  LTOF_REQUIRE(!lr_grid.empty(), "empty learning-rate grid");
  std::optional<PredictorModel> best;
  for (double lr : lr_grid) {
    try {
      PredictorModel model = train_one(lr);
      if (!best || model.best_val_score < best->best_val_score) best = std::move(model);
    } catch (const TrainingDivergence& e) {
      spdlog::warn("learning rate {} diverged: {}", lr, e.what());
    }
  }
  if (!best) throw TrainingDivergence("every learning rate in the grid diverged");
  return std::move(*best);
}

PipelineDecisions solve_pipeline(const PredictorModel& model, const data::Dataset& dataset,
                                 const IndexList& rows) {
  const auto& problem = *dataset.problem;
  PipelineDecisions out;
  out.decisions = Matrix::Zero(static_cast<Eigen::Index>(rows.size()),
                               static_cast<Eigen::Index>(problem.n_decision()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Vector z = dataset.z.row(static_cast<Eigen::Index>(rows[i])).transpose();
    auto start = std::chrono::steady_clock::now();
    const Vector zeta_hat = nn::mlp_forward(model.net, model.scaler.apply(z)).y;
    auto stop = std::chrono::steady_clock::now();
    out.predict_seconds.push_back(std::chrono::duration<double>(stop - start).count());
    start = std::chrono::steady_clock::now();
    try {
      out.decisions.row(static_cast<Eigen::Index>(i)) = problem.ground_truth(zeta_hat).transpose();
    } catch (const SolverError& e) {
      ++out.solve_failures;
      spdlog::warn("downstream solve failed on sample {}: {}", rows[i], e.what());
    }
    stop = std::chrono::steady_clock::now();
    out.solve_seconds.push_back(std::chrono::duration<double>(stop - start).count());
  }
  return out;
}

lto::EvalSummary evaluate_predictor(const PredictorModel& model, const data::Dataset& dataset,
                                    data::Split split) {
  const IndexList& rows = dataset.splits.of(split);
  const PipelineDecisions pipe = solve_pipeline(model, dataset, rows);
  restore::Restorer restorer(dataset.problem);
  lto::EvalSummary s = lto::evaluate_decisions(dataset, rows, pipe.decisions, restorer, pipe.predict_seconds);
  double solve = 0.0;
  for (double t : pipe.solve_seconds) solve += t;
  s.mean_solve_seconds = rows.empty() ? 0.0 : solve / static_cast<double>(rows.size());
  s.solve_failures = pipe.solve_failures;
  return s;
}

}  // namespace ltof::pto
