#include "ltof/data/dataset.hpp"

#include "ltof/core/error.hpp"
#include "ltof/core/rng.hpp"
#include "ltof/data/features.hpp"
#include "ltof/problems/regret.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace ltof::data {

std::string to_string(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::val:
      return "val";
    case Split::test:
      return "test";
  }
  return "unknown";
}

const IndexList& Splits::of(Split split) const {
  switch (split) {
    case Split::train:
      return train;
    case Split::val:
      return val;
    case Split::test:
      return test;
  }
  return train;
}

Splits proportional_splits(std::size_t n, std::uint64_t seed) {
  LTOF_REQUIRE(n >= 3, "need at least three samples to split");
  IndexList order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const auto held_out = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n / 12.0)));
  Splits s;
  s.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held_out));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(held_out),
                order.begin() + static_cast<std::ptrdiff_t>(2 * held_out));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(2 * held_out), order.end());
  for (IndexList* part : {&s.train, &s.val, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

void Dataset::validate() const {
  LTOF_REQUIRE(problem != nullptr, "dataset has no problem");
  const auto n = zeta.rows();
  LTOF_REQUIRE(z.rows() == n, "z and zeta row counts differ");
  LTOF_REQUIRE(static_cast<std::size_t>(zeta.cols()) == problem->n_param(),
               "zeta width does not match the problem");
  LTOF_REQUIRE(x_star.rows() == 0 ||
                   (x_star.rows() == n &&
                    static_cast<std::size_t>(x_star.cols()) == problem->n_decision()),
               "x_star shape does not match");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const IndexList* part : {&splits.train, &splits.val, &splits.test}) {
    for (std::size_t i : *part) {
      LTOF_REQUIRE(i < static_cast<std::size_t>(n), "split index out of range");
      LTOF_REQUIRE(!seen[i], "splits overlap");
      seen[i] = 1;
    }
  }
  LTOF_REQUIRE(std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; }),
               "splits do not cover every sample");
}

Dataset with_features(const Dataset& base, std::size_t k, std::uint64_t feature_seed,
                      std::size_t feature_dim) {
  Dataset out = base;
  out.k = k;
  out.feature_seed = k == 0 ? 0 : feature_seed;
  out.z = gen_features(base.zeta, k, feature_seed, feature_dim);
  return out;
}

TargetReport precompute_targets(Dataset& dataset, std::size_t threads) {
  dataset.validate();
  TargetReport report;
  const std::size_t n = dataset.size();
  if (dataset.has_targets()) {
    report.solved = n;
    return report;
  }
  const auto& problem = *dataset.problem;
  Matrix targets(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(problem.n_decision()));
  std::vector<char> ok(n, 0);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Vector zeta = dataset.zeta.row(static_cast<Eigen::Index>(i)).transpose();
      try {
        const Vector x = problem.ground_truth(zeta);
        if (problems::violation(problem, x, zeta).max() <= problems::kFeasibilityTolerance) {
          targets.row(static_cast<Eigen::Index>(i)) = x.transpose();
          ok[i] = 1;
        }
      } catch (const SolverError&) {
      }
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, n);
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      pool.emplace_back(work, begin, std::min(n, begin + chunk));
    }
  }

  IndexList kept;
  std::vector<std::size_t> remap(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (ok[i]) {
      remap[i] = kept.size();
      kept.push_back(i);
    }
  }
  report.solved = kept.size();
  report.dropped = n - kept.size();
  if (report.dropped > 0) {
    spdlog::warn("precompute_targets: dropped {} of {} samples whose solve failed", report.dropped, n);
    dataset.z = gather_rows(dataset.z, kept);
    dataset.zeta = gather_rows(dataset.zeta, kept);
    targets = gather_rows(targets, kept);
    for (IndexList* part : {&dataset.splits.train, &dataset.splits.val, &dataset.splits.test}) {
      IndexList next;
      for (std::size_t i : *part) {
        if (remap[i] < n) next.push_back(remap[i]);
      }
      *part = std::move(next);
    }
  }
  dataset.x_star = std::move(targets);
  return report;
}

}  // namespace ltof::data
