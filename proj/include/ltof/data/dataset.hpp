#pragma once

#include "ltof/core/types.hpp"
#include "ltof/problems/problem.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <string>

namespace ltof::data {

enum class Split { train, val, test };
std::string to_string(Split split);

struct Splits {
  IndexList train;
  IndexList val;
  IndexList test;

  const IndexList& of(Split split) const;
};

/// Random partition of [0, n) in the proportions 2000 : 200 : 200.
Splits proportional_splits(std::size_t n, std::uint64_t seed);

/// Aligned samples (z, zeta, x_star), one per row, with a fixed split.
struct Dataset {
  std::shared_ptr<const problems::ParametricProblem> problem;
  Matrix z;
  Matrix zeta;
  Matrix x_star;  // zero rows until targets are computed
  Splits splits;

  std::size_t k = 0;
  std::uint64_t seed = 0;          // parameter generation seed
  std::uint64_t feature_seed = 0;  // seed of G^k (unused for k = 0)
  nlohmann::json generator = nlohmann::json::object();  // generation settings

  std::size_t size() const { return static_cast<std::size_t>(zeta.rows()); }
  bool has_targets() const { return x_star.rows() > 0; }

  /// Throws ContractViolation if shapes disagree or the splits are not a
  /// disjoint cover of the samples.
  void validate() const;
};

/// Copy of `base` whose features are regenerated by G^k (k = 0: z = zeta).
Dataset with_features(const Dataset& base, std::size_t k, std::uint64_t feature_seed,
                      std::size_t feature_dim);

struct TargetReport {
  std::size_t solved = 0;
  std::size_t dropped = 0;
};

/// Fills x_star with the problem's ground truth. Samples whose solve fails or
/// whose solution is infeasible beyond 1e-6 are removed and the splits
/// reindexed. Idempotent: existing targets are kept. Work is spread over
/// `threads` workers; the result does not depend on the thread count.
TargetReport precompute_targets(Dataset& dataset, std::size_t threads = 1);

}  // namespace ltof::data
