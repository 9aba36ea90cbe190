#include "ltof/lto/infer.hpp"

#include "ltof/core/error.hpp"
#include "ltof/lto/dc3.hpp"
#include "ltof/lto/ld.hpp"
#include "ltof/lto/pdl.hpp"

#include <chrono>

namespace ltof::lto {

TrainedModel lto_train(const data::Dataset& dataset, const TrainConfig& config) {
  switch (config.method) {
    case Method::ld:
      return ld_train(dataset, config);
    case Method::pdl:
      return pdl_train(dataset, config);
    case Method::dc3:
      return dc3_train(dataset, config);
  }
  throw ContractViolation("unknown method");
}

Matrix lto_predict(const TrainedModel& model, const Matrix& raw_inputs) {
  LTOF_REQUIRE(static_cast<std::size_t>(raw_inputs.cols()) == model.net.input_dim(),
               "input width " + std::to_string(raw_inputs.cols()) + " does not match the model (" +
                   std::to_string(model.net.input_dim()) + ")");
  Matrix out = nn::forward_batch(model.net, model.scaler.apply(raw_inputs));
  if (model.dc3) out = model.dc3->correct(model.dc3->complete(out), model.t_test);
  return out;
}

Vector lto_infer(const TrainedModel& model, const Vector& raw_input) {
  return lto_predict(model, Matrix(raw_input.transpose())).row(0).transpose();
}

TimedPredictions lto_predict_timed(const TrainedModel& model, const Matrix& raw_inputs) {
  TimedPredictions out;
  out.decisions.resize(raw_inputs.rows(), static_cast<Eigen::Index>(
                                              model.dc3 ? model.dc3->n() : model.net.output_dim()));
  out.seconds.reserve(static_cast<std::size_t>(raw_inputs.rows()));
  for (Eigen::Index i = 0; i < raw_inputs.rows(); ++i) {
    const Vector input = raw_inputs.row(i).transpose();
    const auto start = std::chrono::steady_clock::now();
    const Vector x = lto_infer(model, input);
    out.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    out.decisions.row(i) = x.transpose();
  }
  return out;
}

EvalSummary evaluate_model(const TrainedModel& model, const data::Dataset& dataset,
                           data::Split split) {
  const IndexList& rows = dataset.splits.of(split);
  const TimedPredictions pred = lto_predict_timed(model, raw_inputs(dataset, model.mode, rows));
  restore::Restorer restorer(dataset.problem);
  return evaluate_decisions(dataset, rows, pred.decisions, restorer, pred.seconds);
}

}  // namespace ltof::lto
