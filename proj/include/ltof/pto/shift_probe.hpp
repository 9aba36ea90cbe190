#pragma once

#include "ltof/data/dataset.hpp"
#include "ltof/lto/common.hpp"

#include <filesystem>
#include <vector>

namespace ltof::pto {

/// Input scales probed by default; 1.0 is the in-distribution reference.
std::vector<double> default_shift_scales();

struct ShiftPoint {
  double scale = 1.0;
  double mean_regret = 0.0;          // after restoration
  double mean_regret_percent = 0.0;  // NaN when the optimum is zero
  double mean_violation_pre = 0.0;
};

struct ShiftProbeReport {
  std::vector<ShiftPoint> points;  // one per requested scale, in request order
  double reference_regret = 0.0;   // mean restored regret at scale 1
};

/// Toy 2D dataset with zeta ~ U(low, high)^2, identity features and targets.
data::Dataset gen_toy_dataset(std::size_t n_samples, std::uint64_t seed, double low = 0.5,
                              double high = 1.5);

/// Evaluates a parameter-input proxy on s * zeta for each row of `zetas` and
/// each scale s. Throws ContractViolation on duplicate or nonpositive scales.
ShiftProbeReport distribution_shift_probe(const lto::TrainedModel& proxy,
                                          std::shared_ptr<const problems::ParametricProblem> problem,
                                          const Matrix& zetas, const std::vector<double>& scales);

struct ShiftProbeConfig {
  std::size_t n_samples = 1200;
  std::uint64_t seed = 0;
  double low = 0.5;
  double high = 1.5;
  std::vector<double> scales = default_shift_scales();
  lto::TrainConfig proxy;  // method and epochs of the proxy; the mode is forced to LtO
};

struct ShiftProbeRun {
  lto::TrainedModel proxy;
  ShiftProbeReport report;
};

/// Trains a proxy on the toy problem and probes it on the test split.
ShiftProbeRun run_toy_shift_probe(const ShiftProbeConfig& config);

/// CSV with header `scale,mean_regret,mean_regret_percent`.
void write_shift_csv(const ShiftProbeReport& report, const std::filesystem::path& path);

}  // namespace ltof::pto
