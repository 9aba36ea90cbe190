#pragma once

#include "ltof/core/standardizer.hpp"
#include "ltof/core/types.hpp"
#include "ltof/data/dataset.hpp"
#include "ltof/nn/mlp.hpp"
#include "ltof/restore/restore.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ltof::lto {

enum class Method { ld, pdl, dc3 };
enum class Mode { lto, ltof };

std::string to_string(Method method);
std::string to_string(Mode mode);
Method method_from_string(const std::string& name);
Mode mode_from_string(const std::string& name);

/// The learning-rate grid {5e-2, 1e-2, 5e-3, 1e-3, 5e-4, 1e-4}.
std::vector<double> full_lr_grid();

struct LdConfig {
  double lambda0 = 0.1;
  double mu0 = 0.5;
  double step = 1e-3;
};

struct PdlConfig {
  double rho = 0.5;
  double rho_max = 5000.0;
  double tau = 0.8;
  double alpha = 5.0;
  std::size_t epochs_per_outer = 50;  // primal epochs between dual-network updates
  std::size_t dual_epochs = 50;       // passes over the training split per dual update
};

struct Dc3Config {
  double lambda = 7.5;  // inequality penalty weight
  double mu = 2.5;      // equality penalty weight
  std::size_t t_train = 5;
  std::size_t t_test = 5;
  double step_scale = 0.5;  // correction step = step_scale / |G Z|_2^2
  IndexList completed;      // empty: the last m_eq variables
};

struct TrainConfig {
  Method method = Method::ld;
  Mode mode = Mode::ltof;
  std::vector<double> lr_grid{1e-3};
  std::size_t epochs = 200;
  std::size_t batch_size = 200;
  std::size_t patience = 20;
  std::uint64_t seed = 0;
  std::size_t hidden_width = 64;
  std::size_t hidden_layers = 0;  // 0: 2 for LtO or k = 0, k + 1 otherwise
  double dropout = 0.0;
  LdConfig ld;
  PdlConfig pdl;
  Dc3Config dc3;
};

/// Default depth: 2 hidden layers for LtO and k = 0, else k + 1.
std::size_t default_hidden_layers(Mode mode, std::size_t k);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_score = 0.0;      // mean restored percent regret (absolute when undefined)
  double val_violation = 0.0;  // mean pre-restoration max violation
};

/// Affine completion of the last (or chosen) m_eq variables from Ax = b and an
/// unrolled gradient correction on 1/2 |[Gx - h]_+|^2 along the completion's
/// null-space directions.
struct Dc3Completion {
  IndexList partial;    // variables predicted by the network
  IndexList completed;  // variables solved from the equalities
  Matrix Z;             // n x n_partial, x = x0 + Z x_p
  Vector x0;
  Matrix G;
  Vector h;
  Matrix ZZt;           // Z Z'
  double step = 0.0;

  std::size_t n() const { return static_cast<std::size_t>(Z.rows()); }
  std::size_t n_partial() const { return partial.size(); }

  /// Rows of x_p in, rows of full x out.
  Matrix complete(const Matrix& xp) const;
  /// Applies `steps` correction steps to each row. `trace` receives the
  /// iterates before every step when non-null.
  Matrix correct(const Matrix& X, std::size_t steps, std::vector<Matrix>* trace = nullptr) const;
  /// Maps a gradient at the corrected output back through the corrections
  /// recorded in `trace` and the completion, giving the gradient in x_p.
  Matrix backward(const std::vector<Matrix>& trace, const Matrix& d_out) const;
};

/// Builds a completion for Ax = b, Gx <= h. Throws ContractViolation when the
/// chosen completed block of A is singular.
Dc3Completion make_completion(const problems::LinearConstraints& lin, const IndexList& completed,
                              double step_scale);
/// Default partition: last m_eq variables, with seeded random re-permutation
/// when that block is singular. Throws after 100 failed attempts.
Dc3Completion make_default_completion(const problems::LinearConstraints& lin, std::uint64_t seed,
                                      double step_scale);

/// Everything needed for deterministic inference.
struct TrainedModel {
  Method method = Method::ld;
  Mode mode = Mode::ltof;
  std::size_t k = 0;
  nn::Mlp net;
  Standardizer scaler;
  std::optional<Dc3Completion> dc3;
  std::size_t t_test = 0;

  Vector ld_lambda;
  Vector ld_mu;
  double pdl_rho = 0.0;
  std::optional<nn::Mlp> dual_net;

  double lr = 0.0;
  std::size_t best_epoch = 0;
  double best_val_score = 0.0;
  std::vector<EpochRecord> history;
};

/// Inputs a model of `mode` reads: zeta rows for LtO, z rows for LtOF.
Matrix raw_inputs(const data::Dataset& dataset, Mode mode, const IndexList& rows);
Matrix raw_inputs(const data::Dataset& dataset, Mode mode);

/// Input standardizer fitted on the train split, and every sample's
/// standardized input row.
struct PreparedInputs {
  Standardizer scaler;
  Matrix inputs;
};
PreparedInputs prepare_inputs(const data::Dataset& dataset, Mode mode);

/// Network with the configured width and depth, linear head, seeded from
/// (config.seed, stream).
nn::Mlp init_network(std::size_t input_dim, std::size_t output_dim, const TrainConfig& config,
                     std::size_t k, std::uint64_t stream);

/// Shuffled consecutive batches covering `rows`.
std::vector<IndexList> make_batches(const IndexList& rows, std::size_t batch_size, Rng& rng);

/// Tracks the best score and the epochs elapsed since it.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}
  /// Returns true when `score` improves on the best so far.
  bool update(double score);
  bool should_stop() const { return since_best_ > patience_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t since_best_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

/// Per-split evaluation of decisions against stored targets.
struct EvalSummary {
  std::size_t samples = 0;
  double mean_regret_pre = 0.0;
  double mean_percent_pre = 0.0;   // NaN when percent regret is undefined
  double mean_regret_post = 0.0;
  double mean_percent_post = 0.0;
  double min_regret_post = 0.0;
  double mean_violation_pre = 0.0;  // mean over samples of max violation
  double max_violation_post = 0.0;
  std::size_t restore_failures = 0;
  double mean_infer_seconds = 0.0;
  double mean_solve_seconds = 0.0;  // downstream solver time, solver-based methods only
  double mean_restore_seconds = 0.0;
  std::size_t solve_failures = 0;

  /// Mean restored percent regret, or mean restored absolute regret when the
  /// percent form is undefined.
  double score() const;
};

/// Restores each decision row and compares with the dataset's x_star.
/// `infer_seconds` may be empty.
EvalSummary evaluate_decisions(const data::Dataset& dataset, const IndexList& rows,
                               const Matrix& decisions, restore::Restorer& restorer,
                               const std::vector<double>& infer_seconds = {});

/// Per-batch loss: given the rows and the network outputs for them, returns
/// the mean loss and writes its gradient with respect to the outputs.
using BatchLoss = std::function<double(const IndexList& rows, const Matrix& outputs, Matrix& d_outputs)>;
/// Maps raw network outputs to decisions (identity for most methods).
using Decoder = std::function<Matrix(const Matrix& outputs)>;
/// Called after each epoch with the current network.
using EpochHook = std::function<void(std::size_t epoch, const nn::Mlp& net)>;
/// Replaces the default validation: writes val_score (lower is better) and
/// val_violation for the current network.
using Validator = std::function<void(const nn::Mlp& net, EpochRecord& record)>;

struct LoopSpec {
  const data::Dataset* dataset = nullptr;
  const Matrix* inputs = nullptr;  // standardized inputs for every sample
  nn::Mlp net;
  double lr = 1e-3;
  std::size_t epochs = 200;
  std::size_t batch_size = 200;
  std::size_t patience = 20;
  double dropout = 0.0;
  std::uint64_t seed = 0;
  BatchLoss loss;
  Decoder decode;  // may be empty
  EpochHook end_epoch;  // may be empty
  Validator validate;   // may be empty: restored decision score on val
};

struct LoopResult {
  nn::Mlp best_net;
  std::size_t best_epoch = 0;
  double best_score = 0.0;
  std::vector<EpochRecord> history;
};

/// Adam training over shuffled minibatches of the train split with early
/// stopping on the restored validation score. Returns the best network seen.
/// Throws TrainingDivergence on non-finite losses or gradients.
LoopResult run_training(LoopSpec spec);

/// Trains once per learning rate and keeps the model with the best validation
/// score; learning rates that diverge are skipped.
TrainedModel best_over_lr_grid(const std::vector<double>& lr_grid,
                               const std::function<TrainedModel(double lr)>& train_one);

}  // namespace ltof::lto
