#include "ltof/core/error.hpp"
#include "ltof/data/dataset_io.hpp"
#include "ltof/data/features.hpp"
#include "ltof/data/nonconvex_data.hpp"
#include "ltof/data/portfolio_data.hpp"
#include "ltof/problems/problem.hpp"
#include "ltof/qp/projection.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

using namespace ltof;
using namespace ltof::data;

TEST_CASE("one-layer feature generator matches the recorded golden output") {
  // Golden computed once with numpy from the generator's stored weights.
  const FeatureGenerator g(2, 3, 1, 5);
  Matrix z(1, 2);
  z << 0.7, 1.3;
  const Matrix out = g.apply(z);
  CHECK(out(0, 0) == doctest::Approx(0.06870443866062262).epsilon(1e-14));
  CHECK(out(0, 1) == doctest::Approx(0.5316570704937158).epsilon(1e-14));
  CHECK(out(0, 2) == doctest::Approx(-0.1451323796832043).epsilon(1e-14));
}

TEST_CASE("feature generator is an explicit ReLU network of depth k") {
  Rng rng(1);
  const Matrix zetas = test::random_matrix(rng, 4, 3);
  const FeatureGenerator g(3, 6, 2, 8);
  REQUIRE(g.net().num_layers() == 3);
  Matrix a = zetas;
  for (std::size_t l = 0; l < 3; ++l) {
    a = (a * g.net().weight(l).transpose()).rowwise() + g.net().bias(l).transpose();
    if (l < 2) a = a.cwiseMax(0.0);
  }
  CHECK((g.apply(zetas) - a).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(gen_features(zetas, 0, 8, 6) == zetas);
}

TEST_CASE("portfolio noise matches its distribution") {
  const PortfolioParams p = gen_portfolio_params(10000, 5, 3);
  const double n = static_cast<double>(p.noise.size());
  const double mean = p.noise.mean();
  const double var = (p.noise.array() - mean).square().sum() / (n - 1.0);
  const double s2 = kDefaultSigmaEps * kDefaultSigmaEps;
  CHECK(std::abs(mean) < 3.0 * kDefaultSigmaEps / std::sqrt(n));
  CHECK(std::abs(var - s2) < 3.0 * s2 * std::sqrt(2.0 / n));
  // zeta = alpha (zeta_hat + eps)
  CHECK(((p.zeta - kDefaultAlpha * (p.zeta_hat + p.noise)).cwiseAbs().maxCoeff()) < 1e-12);
  // Sigma is a covariance: symmetric positive definite.
  CHECK((p.sigma - p.sigma.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(p.sigma).eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("every generated nonconvex instance admits a feasible point") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = gen_nonconvex_problem({20, 10, 10}, seed);
    const auto& lin = *p->linear_constraints();
    const Vector x = qp::project_polyhedron(Vector::Zero(20), lin.A, lin.b, lin.G, lin.h);
    CHECK((lin.A * x - lin.b).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((lin.G * x - lin.h).maxCoeff() < 1e-8);
  }
  const Matrix zetas = gen_nonconvex_params(100, 20, 1);
  CHECK(zetas.minCoeff() >= 0.0);
  CHECK(zetas.maxCoeff() <= 5.0);
}

TEST_CASE("splits are a disjoint cover in the 2000:200:200 proportions") {
  const Splits s = proportional_splits(2400, 4);
  CHECK(s.train.size() == 2000);
  CHECK(s.val.size() == 200);
  CHECK(s.test.size() == 200);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 2400);
  CHECK(*all.rbegin() == 2399);
}

TEST_CASE("dataset hashes are stable golden values") {
  Dataset ds = gen_portfolio_dataset(24, 3, 1);
  CHECK(hash_hex(dataset_hash(ds)) == "74db398a516e9da3");
  precompute_targets(ds);
  CHECK(hash_hex(dataset_hash(ds)) == "c8b7941699843830");
  CHECK(hash_hex(dataset_hash(with_features(ds, 2, 9, 5))) == "771097e87fa563f9");
}

TEST_CASE("datasets round-trip through JSON and reject unknown versions") {
  Dataset ds = gen_nonconvex_dataset(30, {6, 3, 3}, 2);
  precompute_targets(ds);
  ds = with_features(ds, 1, 3, 4);
  const auto path = std::filesystem::temp_directory_path() / "ltof_ds.json";
  save_dataset(ds, path);
  const Dataset back = load_dataset(path);
  CHECK(back.z == ds.z);
  CHECK(back.zeta == ds.zeta);
  CHECK(back.x_star == ds.x_star);
  CHECK(back.splits.test == ds.splits.test);
  CHECK(back.k == 1);
  CHECK(dataset_hash(back) == dataset_hash(ds));

  nlohmann::json j = dataset_to_json(ds);
  j["version"] = 99;
  CHECK_THROWS_WITH_AS(dataset_from_json(j), doctest::Contains("unsupported version"), ParseError);
  j = dataset_to_json(ds);
  j.erase("zeta");
  CHECK_THROWS_WITH_AS(dataset_from_json(j), doctest::Contains("zeta"), ParseError);
  CHECK_THROWS_AS(load_dataset("/nonexistent/ds.json"), ParseError);
}

TEST_CASE("CSV export has the documented columns") {
  Dataset ds = gen_portfolio_dataset(24, 3, 1);
  precompute_targets(ds);
  const auto path = std::filesystem::temp_directory_path() / "ltof_ds.csv";
  export_csv(ds, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "sample_id,split,z0,z1,z2,zeta0,zeta1,zeta2,xstar0,xstar1,xstar2");
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == 24);
}

TEST_CASE("targets do not depend on the worker count") {
  Dataset a = gen_nonconvex_dataset(24, {6, 3, 3}, 5);
  Dataset b = a;
  precompute_targets(a, 1);
  precompute_targets(b, 3);
  CHECK(a.x_star == b.x_star);
  const TargetReport again = precompute_targets(a);
  CHECK(again.dropped == 0);
}

TEST_CASE("with_features keeps parameters, targets and splits") {
  Dataset ds = gen_portfolio_dataset(24, 3, 1);
  precompute_targets(ds);
  const Dataset f = with_features(ds, 4, 17, 7);
  CHECK(f.z.cols() == 7);
  CHECK(f.zeta == ds.zeta);
  CHECK(f.x_star == ds.x_star);
  CHECK(f.splits.train == ds.splits.train);
  CHECK(f.k == 4);
  CHECK(with_features(ds, 0, 17, 7).z == ds.zeta);
}
