// Copyright 2026 The Treelets Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "support/helpers.hpp"
#include "support/oracles.hpp"
#include "treelets/error.hpp"
#include "treelets/synthetic.hpp"

using namespace treelets;

namespace {

BlockModelSpec two_blocks(std::size_t b, double rho) {
  BlockModelSpec spec;
  spec.p = 2 * b;
  spec.partition = equal_blocks(2 * b, b);
  spec.within_corr = rho;
  return spec;
}

RotationRecord merge(std::size_t level, std::size_t a, std::size_t b) {
  RotationRecord r;
  r.level = level;
  r.alpha = a;
  r.beta = b;
  r.sum_index = a;
  r.detail_index = b;
  return r;
}

}  // namespace

TEST_CASE("population covariance structure") {
  BlockModelSpec one;
  one.p = 3;
  one.partition = {{0, 1, 2}};
  one.within_corr = 1.0;
  const auto ones = population_covariance_matrix(one);
  for (double v : ones) CHECK(v == 1.0);

  auto spec = two_blocks(3, 0.6);
  const auto c = population_covariance_matrix(spec);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      const bool same = (i < 3) == (j < 3);
      CHECK(c[i * 6 + j] == (i == j ? 1.0 : (same ? 0.6 : 0.0)));
    }
}

TEST_CASE("two-block eigenvalues follow the closed form") {
  const std::size_t b = 5;
  const double rho = 0.7;
  const auto c = population_covariance_matrix(two_blocks(b, rho));
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      c.data(), 2 * b, 2 * b);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  auto ev = es.eigenvalues();
  std::vector<double> got(ev.data(), ev.data() + ev.size());
  std::sort(got.begin(), got.end());
  std::vector<double> want(2 * (b - 1), 1.0 - rho);
  want.push_back(1.0 + (b - 1) * rho);
  want.push_back(1.0 + (b - 1) * rho);
  CHECK(oracle::max_abs_diff(got, want) < 1e-12);
}

TEST_CASE("sample covariance converges to the population") {
  BlockModelSpec spec = two_blocks(3, 0.8);
  spec.across_corr = 0.2;
  spec.variances = {1, 2, 3, 1, 2, 3};
  spec.noise_sd = 0.3;
  spec.seed = 21;
  const auto pop = population_covariance_matrix(spec);
  double dev_small = 0, dev_large = 0;
  const auto small = sample(spec, 100), large = sample(spec, 10000);
  dev_small = oracle::max_abs_diff(oracle::covariance(small), pop);
  dev_large = oracle::max_abs_diff(oracle::covariance(large), pop);
  CHECK(dev_large < dev_small);
  // Entry standard errors at n = 10000 are below 0.05 for these variances.
  CHECK(dev_large < 0.25);
}

TEST_CASE("noiseless perfectly correlated block gives proportional columns") {
  BlockModelSpec spec;
  spec.p = 4;
  spec.partition = {{0, 1, 2}, {3}};
  spec.within_corr = 1.0;
  spec.variances = {1, 4, 9, 1};
  spec.seed = 3;
  const auto x = sample(spec, 20);
  for (std::size_t r = 0; r < 20; ++r) {
    CHECK(x(r, 1) == doctest::Approx(2 * x(r, 0)).epsilon(1e-12));
    CHECK(x(r, 2) == doctest::Approx(3 * x(r, 0)).epsilon(1e-12));
  }
}

TEST_CASE("sampling is deterministic and nested in n") {
  BlockModelSpec spec = two_blocks(4, 0.9);
  spec.noise_sd = 0.25;
  spec.seed = 77;
  CHECK(sample(spec, 50) == sample(spec, 50));
  const auto big = sample(spec, 80);
  const auto small = sample(spec, 30);
  for (std::size_t r = 0; r < 30; ++r)
    for (std::size_t j = 0; j < 8; ++j) CHECK(small(r, j) == big(r, j));
  spec.seed = 78;
  CHECK_FALSE(sample(spec, 50) == small);
}

TEST_CASE("general covariance path samples a non-factor spec") {
  BlockModelSpec spec = two_blocks(3, 0.5);
  spec.across_corr = -0.1;
  spec.seed = 5;
  CHECK_NOTHROW(validate(spec));
  const auto x = sample(spec, 20000);
  CHECK(oracle::max_abs_diff(oracle::covariance(x), population_covariance_matrix(spec)) < 0.06);
}

TEST_CASE("spec validation") {
  auto spec = two_blocks(2, 0.9);
  spec.partition = {{0, 1}, {1, 2, 3}};
  CHECK_THROWS_AS(validate(spec), InputError);
  spec = two_blocks(2, 0.0);
  CHECK_THROWS_AS(validate(spec), InputError);
  spec = two_blocks(3, 0.2);
  spec.across_corr = 0.9;  // not positive semi-definite
  CHECK_THROWS_AS(validate(spec), InputError);
  spec = two_blocks(2, 0.5);
  spec.variances = {1, 1, -1, 1};
  CHECK_THROWS_AS(validate(spec), InputError);
  CHECK(equal_blocks(10, 4) == Partition{{0, 1, 2, 3}, {4, 5, 6, 7, 8, 9}});
}

TEST_CASE("recovery score") {
  SUBCASE("exact population input of well separated specs") {
    for (std::size_t blocks : {2, 3, 4}) {
      BlockModelSpec spec;
      spec.p = blocks * 5;
      spec.partition = equal_blocks(spec.p, 5);
      spec.within_corr = 0.9;
      for (auto m : {Measure::correlation, Measure::covariance}) {
        const auto tree = build_tree_from_state(population_covariance(spec, m), helpers::options(m));
        CHECK(recovery_score(tree, spec.partition) == 1.0);
      }
    }
  }
  SUBCASE("a single block accepts any tree") {
    const auto x = oracle::correlated_matrix(20, 6, 1);
    CHECK(recovery_score(build_tree(x, BuildOptions{}), Partition{{0, 1, 2, 3, 4, 5}}) == 1.0);
  }
  SUBCASE("alternating merges across two blocks score 0") {
    TreeletTree t;
    t.p = 4;
    t.rotations = {merge(1, 0, 2), merge(2, 1, 3), merge(3, 0, 1)};
    CHECK(recovery_score(t, Partition{{0, 1}, {2, 3}}) == 0.0);
  }
  SUBCASE("within-block merges followed by block unions score 1") {
    TreeletTree t;
    t.p = 4;
    t.rotations = {merge(1, 0, 1), merge(2, 2, 3), merge(3, 0, 2)};
    CHECK(recovery_score(t, Partition{{0, 1}, {2, 3}}) == 1.0);
  }
}

TEST_CASE("minimum sample size experiment") {
  ExperimentTemplate tmpl;
  tmpl.within_corr = 0.9;
  tmpl.noise_sd = 0.1;
  tmpl.seed = 2024;
  tmpl.n_max = 1024;
  // Two blocks of two; pinned from the first seeded run.
  ExperimentTemplate pairs = tmpl;
  pairs.block_size = 2;
  const auto small = min_sample_experiment({4}, pairs, 0.9, 50);
  REQUIRE(small.rows.size() == 1);
  REQUIRE(small.rows[0].n_star.has_value());
  CHECK(*small.rows[0].n_star == 6);

  tmpl.noise_sd = 0.25;
  const auto grid = min_sample_experiment({8, 16, 32}, tmpl, 0.9, 30);
  for (std::size_t i = 0; i + 1 < grid.rows.size(); ++i) {
    REQUIRE(grid.rows[i].n_star.has_value());
    REQUIRE(grid.rows[i + 1].n_star.has_value());
    CHECK(*grid.rows[i].n_star <= *grid.rows[i + 1].n_star);
  }

  // Halving the within-block separation needs more samples.
  ExperimentTemplate weak = tmpl;
  weak.within_corr = 0.45;
  const auto w = min_sample_experiment({16}, weak, 0.9, 30);
  REQUIRE(w.rows[0].n_star.has_value());
  CHECK(*w.rows[0].n_star > *grid.rows[1].n_star);
}

TEST_CASE("log-log slope") {
  std::vector<MinSampleRow> rows{{16, 10}, {64, 20}, {256, 40}};
  CHECK(log_log_slope(rows).value() == doctest::Approx(0.5).epsilon(1e-12));
  rows[2].n_star.reset();
  CHECK(log_log_slope(rows).value() == doctest::Approx(0.5).epsilon(1e-12));
  rows.pop_back();
  rows.pop_back();
  CHECK_FALSE(log_log_slope(rows).has_value());
}
