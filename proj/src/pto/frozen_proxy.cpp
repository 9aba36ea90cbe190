#include "ltof/pto/frozen_proxy.hpp"

#include "ltof/core/error.hpp"
#include "ltof/lto/infer.hpp"
#include "ltof/pto/two_stage.hpp"

#include <chrono>
#include <optional>

namespace ltof::pto {

double frozen_proxy_loss(const lto::TrainedModel& proxy, const problems::ParametricProblem& problem,
                         const Matrix& zeta_hat, const Matrix& zeta, Matrix* d_zeta_hat) {
  LTOF_REQUIRE(proxy.mode == lto::Mode::lto, "the frozen proxy must take parameters as input");
  LTOF_REQUIRE(zeta_hat.rows() == zeta.rows() && zeta_hat.cols() == zeta.cols() && zeta.rows() > 0,
               "prediction and target shapes differ");
  nn::Tape tape;
  const Matrix out = nn::forward_batch(proxy.net, proxy.scaler.apply(zeta_hat), &tape);
  std::vector<Matrix> trace;
  const Matrix X = proxy.dc3 ? proxy.dc3->correct(proxy.dc3->complete(out), proxy.t_test, &trace) : out;
  const double scale = 1.0 / static_cast<double>(zeta.rows());
  double total = 0.0;
  Matrix dX(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Vector x = X.row(i).transpose();
    const Vector z = zeta.row(i).transpose();
    total += problem.objective(x, z);
    dX.row(i) = scale * problem.grad_x_objective(x, z).transpose();
  }
  if (d_zeta_hat) {
    const Matrix d_out = proxy.dc3 ? proxy.dc3->backward(trace, dX) : dX;
    *d_zeta_hat = proxy.scaler.backprop(nn::backward_batch(proxy.net, tape, d_out).inputs);
  }
  return total * scale;
}

PredictorModel frozen_proxy_train_lr(const lto::TrainedModel& proxy, const data::Dataset& ds,
                                     const PtoConfig& config, double lr, const nn::Mlp* init) {
  LTOF_REQUIRE(proxy.mode == lto::Mode::lto, "the frozen proxy must take parameters as input");
  LTOF_REQUIRE(proxy.net.input_dim() == ds.problem->n_param(), "proxy input width mismatch");
  lto::PreparedInputs prepared = lto::prepare_inputs(ds, lto::Mode::ltof);

  lto::LoopSpec spec;
  spec.dataset = &ds;
  spec.inputs = &prepared.inputs;
  spec.net = init ? *init
                  : init_predictor(static_cast<std::size_t>(prepared.inputs.cols()),
                                   ds.problem->n_param(), config, 51);
  spec.lr = lr;
  spec.epochs = config.epochs;
  spec.batch_size = config.batch_size;
  spec.patience = config.patience;
  spec.seed = derive_seed(config.seed, 52);
  spec.loss = [&](const IndexList& rows, const Matrix& Y, Matrix& dY) {
    double loss = frozen_proxy_loss(proxy, *ds.problem, Y, gather_rows(ds.zeta, rows), &dY);
    if (ds.has_targets()) {
      for (std::size_t r : rows) {
        const auto i = static_cast<Eigen::Index>(r);
        loss -= ds.problem->objective(ds.x_star.row(i).transpose(), ds.zeta.row(i).transpose()) /
                static_cast<double>(rows.size());
      }
    }
    return loss;
  };
  spec.decode = [&](const Matrix& zeta_hat) { return lto::lto_predict(proxy, zeta_hat); };

  lto::LoopResult loop = lto::run_training(std::move(spec));
  PredictorModel model;
  model.kind = init ? Baseline::frozen_proxy_pretrained : Baseline::frozen_proxy;
  model.m = config.m;
  model.net = std::move(loop.best_net);
  model.scaler = std::move(prepared.scaler);
  model.lr = lr;
  model.best_epoch = loop.best_epoch;
  model.best_val_score = loop.best_score;
  model.history = std::move(loop.history);
  return model;
}

PredictorModel frozen_proxy_train(const lto::TrainedModel& proxy, const data::Dataset& dataset,
                                  const PtoConfig& config, bool pretrain) {
  std::optional<nn::Mlp> init;
  if (pretrain) init = two_stage_train(dataset, config).net;
  return best_predictor_over_lr(config.lr_grid, [&](double lr) {
    return frozen_proxy_train_lr(proxy, dataset, config, lr, init ? &*init : nullptr);
  });
}

lto::EvalSummary evaluate_frozen_proxy(const PredictorModel& model, const lto::TrainedModel& proxy,
                                       const data::Dataset& dataset, data::Split split) {
  const IndexList& rows = dataset.splits.of(split);
  Matrix decisions(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(dataset.problem->n_decision()));
  std::vector<double> seconds;
  seconds.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Vector z = dataset.z.row(static_cast<Eigen::Index>(rows[i])).transpose();
    const auto start = std::chrono::steady_clock::now();
    const Vector zeta_hat = nn::mlp_forward(model.net, model.scaler.apply(z)).y;
    decisions.row(static_cast<Eigen::Index>(i)) = lto::lto_infer(proxy, zeta_hat).transpose();
    seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  restore::Restorer restorer(dataset.problem);
  return lto::evaluate_decisions(dataset, rows, decisions, restorer, seconds);
}

}  // namespace ltof::pto
