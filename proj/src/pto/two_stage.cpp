#include "ltof/pto/two_stage.hpp"

#include "ltof/core/error.hpp"

namespace ltof::pto {

double mse_loss(const Matrix& zeta_hat, const Matrix& zeta, Matrix* d_zeta_hat) {
  LTOF_REQUIRE(zeta_hat.rows() == zeta.rows() && zeta_hat.cols() == zeta.cols() && zeta.rows() > 0,
               "prediction and target shapes differ");
  const Matrix diff = zeta_hat - zeta;
  const double scale = 1.0 / static_cast<double>(zeta.rows());
  if (d_zeta_hat) *d_zeta_hat = 2.0 * scale * diff;
  return scale * diff.squaredNorm();
}

PredictorModel two_stage_train_lr(const data::Dataset& ds, const PtoConfig& config, double lr,
                                  const std::optional<nn::Mlp>& init) {
  lto::PreparedInputs prepared = lto::prepare_inputs(ds, lto::Mode::ltof);
  const auto in = static_cast<std::size_t>(prepared.inputs.cols());
  const std::size_t out = ds.problem->n_param();
  const Matrix val_inputs = gather_rows(prepared.inputs, ds.splits.val);
  const Matrix val_zeta = gather_rows(ds.zeta, ds.splits.val);

  lto::LoopSpec spec;
  spec.dataset = &ds;
  spec.inputs = &prepared.inputs;
  spec.net = init ? *init : init_predictor(in, out, config, 21);
  LTOF_REQUIRE(spec.net.input_dim() == in && spec.net.output_dim() == out,
               "initial network shape does not match the dataset");
  spec.lr = lr;
  spec.epochs = config.epochs;
  spec.batch_size = config.batch_size;
  spec.patience = config.patience;
  spec.seed = derive_seed(config.seed, 22);
  spec.loss = [&](const IndexList& rows, const Matrix& Y, Matrix& dY) {
    return mse_loss(Y, gather_rows(ds.zeta, rows), &dY);
  };
  spec.validate = [&](const nn::Mlp& net, lto::EpochRecord& rec) {
    rec.val_score = mse_loss(nn::forward_batch(net, val_inputs), val_zeta, nullptr);
    rec.val_violation = 0.0;
  };

  lto::LoopResult loop = lto::run_training(std::move(spec));
  PredictorModel model;
  model.kind = Baseline::two_stage;
  model.m = config.m;
  model.net = std::move(loop.best_net);
  model.scaler = std::move(prepared.scaler);
  model.lr = lr;
  model.best_epoch = loop.best_epoch;
  model.best_val_score = loop.best_score;
  model.history = std::move(loop.history);
  return model;
}

PredictorModel two_stage_train(const data::Dataset& dataset, const PtoConfig& config) {
  return best_predictor_over_lr(config.lr_grid,
                                [&](double lr) { return two_stage_train_lr(dataset, config, lr); });
}

}  // namespace ltof::pto
