#include "ltof/lto/common.hpp"

#include "ltof/core/error.hpp"
#include "ltof/nn/adam.hpp"
#include "ltof/problems/regret.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

namespace ltof::lto {

std::string to_string(Method method) {
  switch (method) {
    case Method::ld:
      return "LD";
    case Method::pdl:
      return "PDL";
    case Method::dc3:
      return "DC3";
  }
  return "unknown";
}

std::string to_string(Mode mode) { return mode == Mode::lto ? "LtO" : "LtOF"; }

Method method_from_string(const std::string& name) {
  if (name == "LD" || name == "ld") return Method::ld;
  if (name == "PDL" || name == "pdl") return Method::pdl;
  if (name == "DC3" || name == "dc3") return Method::dc3;
  throw ContractViolation("unknown method '" + name + "' (expected LD, PDL or DC3)");
}

Mode mode_from_string(const std::string& name) {
  if (name == "LtO" || name == "lto") return Mode::lto;
  if (name == "LtOF" || name == "ltof") return Mode::ltof;
  throw ContractViolation("unknown mode '" + name + "' (expected LtO or LtOF)");
}

std::vector<double> full_lr_grid() { return {5e-2, 1e-2, 5e-3, 1e-3, 5e-4, 1e-4}; }

std::size_t default_hidden_layers(Mode mode, std::size_t k) {
  if (mode == Mode::lto || k == 0) return 2;
  return k + 1;
}

Matrix raw_inputs(const data::Dataset& dataset, Mode mode, const IndexList& rows) {
  return gather_rows(mode == Mode::lto ? dataset.zeta : dataset.z, rows);
}

Matrix raw_inputs(const data::Dataset& dataset, Mode mode) {
  return mode == Mode::lto ? dataset.zeta : dataset.z;
}

PreparedInputs prepare_inputs(const data::Dataset& dataset, Mode mode) {
  PreparedInputs out;
  const Matrix raw = raw_inputs(dataset, mode);
  out.scaler = Standardizer::fit(gather_rows(raw, dataset.splits.train));
  out.inputs = out.scaler.apply(raw);
  return out;
}

nn::Mlp init_network(std::size_t input_dim, std::size_t output_dim, const TrainConfig& config,
                     std::size_t k, std::uint64_t stream) {
  const std::size_t depth =
      config.hidden_layers > 0 ? config.hidden_layers : default_hidden_layers(config.mode, k);
  return nn::mlp_init(nn::layer_dims_for(input_dim, config.hidden_width, depth, output_dim),
                      nn::OutputHead::linear, derive_seed(config.seed, stream));
}

std::vector<IndexList> make_batches(const IndexList& rows, std::size_t batch_size, Rng& rng) {
  LTOF_REQUIRE(batch_size >= 1, "batch size must be positive");
  IndexList order = rows;
  rng.shuffle(order);
  std::vector<IndexList> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

bool EarlyStopper::update(double score) {
  if (score < best_) {
    best_ = score;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

double EvalSummary::score() const {
  return std::isfinite(mean_percent_post) ? mean_percent_post : mean_regret_post;
}

EvalSummary evaluate_decisions(const data::Dataset& dataset, const IndexList& rows,
                               const Matrix& decisions, restore::Restorer& restorer,
                               const std::vector<double>& infer_seconds) {
  LTOF_REQUIRE(dataset.has_targets(), "evaluation needs precomputed targets");
  LTOF_REQUIRE(decisions.rows() == static_cast<Eigen::Index>(rows.size()),
               "one decision per row is required");
  LTOF_REQUIRE(infer_seconds.empty() || infer_seconds.size() == rows.size(),
               "one inference time per row is required");
  const auto& problem = *dataset.problem;
  EvalSummary s;
  s.samples = rows.size();
  if (rows.empty()) return s;
  s.min_regret_post = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    const Vector zeta = dataset.zeta.row(r).transpose();
    const Vector x_star = dataset.x_star.row(r).transpose();
    const Vector x_hat = decisions.row(static_cast<Eigen::Index>(i)).transpose();
    const problems::RegretResult pre = problems::regret(problem, x_hat, zeta, x_star);
    const restore::RestorationResult restored = restorer.restore(x_hat, zeta);
    const problems::RegretResult post = problems::regret(problem, restored.x, zeta, x_star);
    s.mean_regret_pre += pre.regret;
    s.mean_percent_pre += pre.percent;
    s.mean_regret_post += post.regret;
    s.mean_percent_post += post.percent;
    s.min_regret_post = std::min(s.min_regret_post, post.regret);
    s.mean_violation_pre += pre.violation.max();
    s.max_violation_post = std::max(s.max_violation_post, post.violation.max());
    if (!restored.converged) ++s.restore_failures;
    s.mean_restore_seconds += restored.seconds;
    if (!infer_seconds.empty()) s.mean_infer_seconds += infer_seconds[i];
  }
  const double n = static_cast<double>(rows.size());
  s.mean_regret_pre /= n;
  s.mean_percent_pre /= n;
  s.mean_regret_post /= n;
  s.mean_percent_post /= n;
  s.mean_violation_pre /= n;
  s.mean_restore_seconds /= n;
  s.mean_infer_seconds /= n;
  return s;
}

LoopResult run_training(LoopSpec spec) {
  LTOF_REQUIRE(spec.dataset != nullptr && spec.inputs != nullptr, "dataset and inputs required");
  LTOF_REQUIRE(spec.loss != nullptr, "a batch loss is required");
  const data::Dataset& ds = *spec.dataset;
  LTOF_REQUIRE(spec.inputs->rows() == static_cast<Eigen::Index>(ds.size()),
               "one input row per sample is required");
  LTOF_REQUIRE(!ds.splits.train.empty() && !ds.splits.val.empty(), "empty train or val split");

  Rng batch_rng(derive_seed(spec.seed, 101));
  Rng dropout_rng(derive_seed(spec.seed, 102));
  nn::Mlp net = std::move(spec.net);
  nn::AdamState adam(net.num_parameters());
  restore::Restorer restorer(ds.problem);
  const Matrix val_inputs = gather_rows(*spec.inputs, ds.splits.val);

  auto validate = [&](EpochRecord& rec) {
    if (spec.validate) {
      spec.validate(net, rec);
      if (!std::isfinite(rec.val_score)) throw TrainingDivergence("validation score is not finite");
      return;
    }
    Matrix outputs = nn::forward_batch(net, val_inputs);
    const Matrix decisions = spec.decode ? spec.decode(outputs) : outputs;
    double violation = 0.0;
    for (std::size_t i = 0; i < ds.splits.val.size(); ++i) {
      const Vector zeta = ds.zeta.row(static_cast<Eigen::Index>(ds.splits.val[i])).transpose();
      violation += problems::violation(*ds.problem, decisions.row(static_cast<Eigen::Index>(i)).transpose(), zeta).max();
    }
    rec.val_violation = violation / static_cast<double>(ds.splits.val.size());
    if (ds.has_targets()) {
      rec.val_score = evaluate_decisions(ds, ds.splits.val, decisions, restorer).score();
    } else {
      // Without targets the mean restored objective ranks models equally well.
      double total = 0.0;
      for (std::size_t i = 0; i < ds.splits.val.size(); ++i) {
        const Vector zeta = ds.zeta.row(static_cast<Eigen::Index>(ds.splits.val[i])).transpose();
        const Vector x = restorer.restore(decisions.row(static_cast<Eigen::Index>(i)).transpose(), zeta).x;
        total += ds.problem->objective(x, zeta);
      }
      rec.val_score = total / static_cast<double>(ds.splits.val.size());
    }
    if (!std::isfinite(rec.val_score)) throw TrainingDivergence("validation score is not finite");
  };

  LoopResult result;
  EarlyStopper stopper(spec.patience);
  result.best_net = net;
  for (std::size_t epoch = 1; epoch <= spec.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (const IndexList& rows : make_batches(ds.splits.train, spec.batch_size, batch_rng)) {
      const Matrix X = gather_rows(*spec.inputs, rows);
      nn::Tape tape;
      const nn::DropoutConfig dropout{spec.dropout, spec.dropout > 0.0 ? &dropout_rng : nullptr};
      const Matrix Y = nn::forward_batch(net, X, &tape, dropout);
      Matrix dY = Matrix::Zero(Y.rows(), Y.cols());
      const double loss = spec.loss(rows, Y, dY);
      if (!std::isfinite(loss)) throw TrainingDivergence("training loss is not finite");
      const nn::BatchGradients grads = nn::backward_batch(net, tape, dY);
      nn::adam_step(adam, net.mutable_parameters(), grads.params, spec.lr);
      loss_sum += loss * static_cast<double>(rows.size());
      seen += rows.size();
    }
    if (spec.end_epoch) spec.end_epoch(epoch, net);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(seen);
    validate(rec);
    result.history.push_back(rec);
    if (stopper.update(rec.val_score)) {
      result.best_net = net;
      result.best_epoch = epoch;
    }
    if (stopper.should_stop()) break;
  }
  result.best_score = stopper.best();
  return result;
}

TrainedModel best_over_lr_grid(const std::vector<double>& lr_grid,
                               const std::function<TrainedModel(double lr)>& train_one) {
  LTOF_REQUIRE(!lr_grid.empty(), "empty learning-rate grid");
  std::optional<TrainedModel> best;
  for (double lr : lr_grid) {
    try {
      TrainedModel model = train_one(lr);
      if (!best || model.best_val_score < best->best_val_score) best = std::move(model);
    } catch (const TrainingDivergence& e) {
      spdlog::warn("learning rate {} diverged: {}", lr, e.what());
    }
  }
  if (!best) throw TrainingDivergence("every learning rate in the grid diverged");
  return std::move(*best);
}

}  // namespace ltof::lto
