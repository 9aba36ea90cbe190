#include "ltof/pto/shift_probe.hpp"

#include "ltof/core/error.hpp"
#include "ltof/core/rng.hpp"
#include "ltof/lto/infer.hpp"
#include "ltof/problems/regret.hpp"
#include "ltof/problems/toy2d.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>

namespace ltof::pto {

std::vector<double> default_shift_scales() { return {0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0}; }

data::Dataset gen_toy_dataset(std::size_t n_samples, std::uint64_t seed, double low, double high) {
  LTOF_REQUIRE(0.0 < low && low < high, "toy parameters must be positive with low < high");
  data::Dataset ds;
  ds.problem = std::make_shared<problems::Toy2dProblem>();
  Rng rng(derive_seed(seed, 61));
  ds.zeta.resize(static_cast<Eigen::Index>(n_samples), 2);
  for (Eigen::Index i = 0; i < ds.zeta.rows(); ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) ds.zeta(i, j) = rng.uniform(low, high);
  }
  ds.z = ds.zeta;
  ds.splits = data::proportional_splits(n_samples, derive_seed(seed, 62));
  ds.seed = seed;
  ds.generator = {{"distribution", "uniform"}, {"low", low}, {"high", high}};
  data::precompute_targets(ds);
  return ds;
}

ShiftProbeReport distribution_shift_probe(const lto::TrainedModel& proxy,
                                          std::shared_ptr<const problems::ParametricProblem> problem,
                                          const Matrix& zetas, const std::vector<double>& scales) {
  LTOF_REQUIRE(proxy.mode == lto::Mode::lto, "the probe needs a parameter-input proxy");
  LTOF_REQUIRE(zetas.rows() > 0, "no probe parameters");
  std::vector<double> sorted = scales;
  std::sort(sorted.begin(), sorted.end());
  LTOF_REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "duplicate scales");
  LTOF_REQUIRE(sorted.empty() || sorted.front() > 0.0, "scales must be positive");

  restore::Restorer restorer(problem);
  auto probe = [&](double s) {
    ShiftPoint p;
    p.scale = s;
    const Matrix shifted = s * zetas;
    const Matrix X = lto::lto_predict(proxy, shifted);
    for (Eigen::Index i = 0; i < shifted.rows(); ++i) {
      const Vector zeta = shifted.row(i).transpose();
      const Vector x_hat = X.row(i).transpose();
      const Vector x_star = problem->ground_truth(zeta);
      const problems::RegretResult r =
          problems::regret(*problem, restorer.restore(x_hat, zeta).x, zeta, x_star);
      p.mean_regret += r.regret;
      p.mean_regret_percent += r.percent;
      p.mean_violation_pre += problems::violation(*problem, x_hat, zeta).max();
    }
    const double n = static_cast<double>(shifted.rows());
    p.mean_regret /= n;
    p.mean_regret_percent /= n;
    p.mean_violation_pre /= n;
    return p;
  };

  ShiftProbeReport report;
  for (double s : scales) report.points.push_back(probe(s));
  const auto ref = std::find_if(report.points.begin(), report.points.end(),
                                [](const ShiftPoint& p) { return p.scale == 1.0; });
  report.reference_regret = ref != report.points.end() ? ref->mean_regret : probe(1.0).mean_regret;
  return report;
}

ShiftProbeRun run_toy_shift_probe(const ShiftProbeConfig& config) {
  const data::Dataset ds = gen_toy_dataset(config.n_samples, config.seed, config.low, config.high);
  lto::TrainConfig train = config.proxy;
  train.mode = lto::Mode::lto;
  ShiftProbeRun run;
  run.proxy = lto::lto_train(ds, train);
  run.report = distribution_shift_probe(run.proxy, ds.problem, gather_rows(ds.zeta, ds.splits.test),
                                        config.scales);
  return run;
}

void write_shift_csv(const ShiftProbeReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
  out << "scale,mean_regret,mean_regret_percent\n" << std::setprecision(10);
  for (const ShiftPoint& p : report.points) {
    out << p.scale << ',' << p.mean_regret << ',' << p.mean_regret_percent << '\n';
  }
}

}  // namespace ltof::pto
