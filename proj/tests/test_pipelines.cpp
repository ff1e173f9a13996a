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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "support/helpers.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"
#include "treelets/basis.hpp"
#include "treelets/error.hpp"
#include "treelets/io.hpp"
#include "treelets/pipelines.hpp"
#include "treelets/synthetic.hpp"

using namespace treelets;

namespace {

struct Regression {
  DataMatrix x;
  std::vector<double> y;
};

// y is the mean of block {0..3} plus a little noise.
Regression block_mean_problem(std::uint64_t seed, std::size_t n = 120, bool pure_noise = false) {
  BlockModelSpec spec;
  spec.p = 12;
  spec.partition = {{0, 1, 2, 3}, {4, 5, 6, 7}, {8}, {9}, {10}, {11}};
  spec.within_corr = 0.85;
  spec.noise_sd = 0.3;
  spec.seed = seed;
  auto x = sample(spec, n);
  std::mt19937 gen(static_cast<unsigned>(seed));
  std::normal_distribution<double> nd;
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double m = (x(r, 0) + x(r, 1) + x(r, 2) + x(r, 3)) / 4.0;
    y[r] = pure_noise ? nd(gen) : m + 0.1 * nd(gen);
  }
  return {std::move(x), std::move(y)};
}

PipelineConfig regression_config(std::vector<std::size_t> levels, std::vector<std::size_t> ks) {
  PipelineConfig c;
  c.level_grid = std::move(levels);
  c.k_grid = std::move(ks);
  c.folds = 5;
  c.seed = 99;
  return c;
}

std::string tree_bytes(const TreeletTree& t) {
  io::TreeDocument doc;
  doc.tree = t;
  return io::serialize_tree(doc);
}

}  // namespace

TEST_CASE("fold assignment is balanced and seeded") {
  const auto a = fold_assignment(23, 5, 1);
  CHECK(a == fold_assignment(23, 5, 1));
  CHECK_FALSE(a == fold_assignment(23, 5, 2));
  std::vector<std::size_t> count(5, 0);
  for (auto f : a) ++count.at(f);
  CHECK(*std::max_element(count.begin(), count.end()) -
            *std::min_element(count.begin(), count.end()) <= 1);
}

TEST_CASE("cv grid agrees with an exhaustive single-candidate oracle") {
  const auto prob = block_mean_problem(1);
  const std::vector<std::size_t> levels{3, 6, 11}, ks{1, 2, 3};
  const auto res = cv_select(prob.x, prob.y, regression_config(levels, ks));
  REQUIRE(res.grid.size() == 9);
  double best = -1e300;
  std::size_t bl = 0, bk = 0;
  for (std::size_t l : levels)
    for (std::size_t k : ks) {
      const auto single = cv_select(prob.x, prob.y, regression_config({l}, {k}));
      CHECK(single.best_level == l);
      CHECK(single.best_k == k);
      const auto it = std::find_if(res.grid.begin(), res.grid.end(),
                                   [&](const GridScore& g) { return g.level == l && g.k == k; });
      REQUIRE(it != res.grid.end());
      CHECK(it->score == doctest::Approx(single.cv_score).epsilon(1e-12));
      if (single.cv_score > best + 1e-12 || (std::abs(single.cv_score - best) <= 1e-12 && k < bk)) {
        best = single.cv_score;
        bl = l;
        bk = k;
      }
    }
  CHECK(res.best_k == bk);
  CHECK(res.best_level == bl);
  CHECK(res.cv_score > 0.8);
  CHECK(res.best_k <= 3);

  // The winning model uses the block's coarse scaling function.
  std::vector<std::size_t> all(prob.x.rows());
  std::iota(all.begin(), all.end(), 0);
  const auto model =
      fit_fold(prob.x, prob.y, all, res.best_level, res.best_k, regression_config(levels, ks));
  bool found = false;
  for (std::size_t f = 0; f < model.features.k(); ++f) {
    double e = 0.0;
    for (std::size_t i = 0; i < 4; ++i) e += std::pow(model.features.loadings[f * 12 + i], 2);
    if (e > 0.99 && model.features.kinds[f] == FunctionKind::scaling) found = true;
  }
  CHECK(found);
}

TEST_CASE("pure-noise response scores like its permutations") {
  const auto prob = block_mean_problem(5, 100, true);
  const auto config = regression_config({5, 11}, {1, 2, 4});
  const double observed = cv_select(prob.x, prob.y, config).cv_score;
  std::vector<double> perm_scores;
  std::mt19937 gen(17);
  for (int t = 0; t < 19; ++t) {
    auto y = prob.y;
    std::shuffle(y.begin(), y.end(), gen);
    perm_scores.push_back(cv_select(prob.x, y, config).cv_score);
  }
  // Rank of the observed score among 20 exchangeable values: not the extreme.
  const auto above = std::count_if(perm_scores.begin(), perm_scores.end(),
                                   [&](double s) { return s >= observed; });
  CHECK(above >= 1);
  CHECK(observed < 0.2);
}

TEST_CASE("cv classification and input checks") {
  auto prob = block_mean_problem(3);
  std::vector<double> labels(prob.y.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = prob.y[i] > 0 ? 1.0 : 0.0;
  auto config = regression_config({6, 11}, {1, 2});
  config.task = Task::classification;
  const auto res = cv_select(prob.x, labels, config);
  CHECK(res.cv_score > 0.85);

  auto bad = regression_config({12}, {1});
  CHECK_THROWS_AS(cv_select(prob.x, prob.y, bad), InputError);
  bad = regression_config({3}, {13});
  CHECK_THROWS_AS(cv_select(prob.x, prob.y, bad), InputError);
  bad = regression_config({3}, {1});
  bad.folds = 1;
  CHECK_THROWS_AS(cv_select(prob.x, prob.y, bad), InputError);
  CHECK_THROWS_AS(cv_select(prob.x, std::vector<double>(5, 0.0), regression_config({3}, {1})),
                  InputError);
}

TEST_CASE("fit_fold reads training rows only") {
  auto prob = block_mean_problem(8, 60);
  std::vector<std::size_t> train(40);
  std::iota(train.begin(), train.end(), 0);
  const auto config = regression_config({6}, {2});
  const auto a = fit_fold(prob.x, prob.y, train, 6, 2, config);
  std::vector<double> v(prob.x.values().begin(), prob.x.values().end());
  for (std::size_t r = 40; r < 60; ++r)
    for (std::size_t j = 0; j < 12; ++j) v[r * 12 + j] = 1e6 * (double(j) - 3.0);
  auto y = prob.y;
  for (std::size_t r = 40; r < 60; ++r) y[r] = -1e9;
  const auto b = fit_fold(DataMatrix(60, 12, v), y, train, 6, 2, config);
  CHECK(tree_bytes(a.tree) == tree_bytes(b.tree));
  CHECK(a.weights == b.weights);
  CHECK(a.intercept == b.intercept);
}

TEST_CASE("two-branch cut") {
  SUBCASE("two samples") {
    TreeletTree t = build_tree(DataMatrix(3, 2, {1, 2, 2, 1, 0, 4}), BuildOptions{});
    const auto [b0, b1] = two_branch_cut(t);
    CHECK(b0.size() == 1);
    CHECK(b1.size() == 1);
  }
  SUBCASE("block-diagonal sample similarity") {
    BlockModelSpec spec;
    spec.p = 10;
    spec.partition = {{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}};
    spec.within_corr = 0.8;
    spec.variances = {1, 1, 1, 1, 1, 2, 2, 2, 2, 2};
    for (auto m : {Measure::correlation, Measure::covariance}) {
      const auto tree = build_tree_from_state(population_covariance(spec, m), helpers::options(m));
      auto [b0, b1] = two_branch_cut(tree);
      if (b0.front() != 0) std::swap(b0, b1);
      CHECK(b0 == std::vector<std::size_t>{0, 1, 2, 3, 4});
      CHECK(b1 == std::vector<std::size_t>{5, 6, 7, 8, 9});
    }
  }
  SUBCASE("branches partition the index set") {
    for (unsigned seed = 0; seed < 20; ++seed) {
      const std::size_t p = 2 + seed;
      const auto tree = build_tree(oracle::correlated_matrix(15, p, seed), BuildOptions{});
      const auto [b0, b1] = two_branch_cut(tree);
      std::vector<std::size_t> all(b0);
      all.insert(all.end(), b1.begin(), b1.end());
      std::sort(all.begin(), all.end());
      std::vector<std::size_t> want(p);
      std::iota(want.begin(), want.end(), 0);
      CHECK(all == want);
      CHECK_FALSE(b0.empty());
      CHECK_FALSE(b1.empty());
    }
  }
  SUBCASE("partial trees are rejected") {
    BuildOptions opt;
    opt.level = 2;
    CHECK_THROWS(two_branch_cut(build_tree(oracle::correlated_matrix(10, 5, 1), opt)));
  }
}

TEST_CASE("two-way scheme on the synthetic instance") {
  const auto inst = instances::two_way_instance(2026);
  TwoWayConfig config;
  const auto r = two_way_classify(inst.samples, inst.train_rows, inst.train_labels,
                                  inst.test_rows, inst.test_labels, config);
  CHECK(r.test_error == 0.0);
  CHECK(r.predicted.size() == inst.samples.rows());
  for (std::size_t i = 0; i < r.predicted.size(); ++i)
    CHECK(r.predicted[i] == r.class_of_branch[r.branch_assignment[i]]);

  SUBCASE("swapping class names swaps predictions") {
    auto tl = inst.train_labels, sl = inst.test_labels;
    for (auto& l : tl) l = 1 - l;
    for (auto& l : sl) l = 1 - l;
    const auto s = two_way_classify(inst.samples, inst.train_rows, tl, inst.test_rows, sl, config);
    CHECK(s.branch_assignment == r.branch_assignment);
    for (std::size_t i = 0; i < r.predicted.size(); ++i) CHECK(s.predicted[i] == 1 - r.predicted[i]);
    CHECK(s.test_error == r.test_error);
  }
  SUBCASE("held-out rows do not reach the variable tree") {
    std::vector<double> v(inst.samples.values().begin(), inst.samples.values().end());
    std::mt19937 gen(1);
    std::uniform_real_distribution<double> junk(-1e8, 1e8);
    for (std::size_t r : inst.test_rows)
      for (std::size_t j = 0; j < 100; ++j) v[r * 100 + j] = junk(gen);
    const DataMatrix garbage(inst.samples.rows(), 100, v);
    const auto g = two_way_classify(garbage, inst.train_rows, inst.train_labels, inst.test_rows,
                                    inst.test_labels, config);
    CHECK(tree_bytes(g.variable_tree) == tree_bytes(r.variable_tree));
    CHECK(g.feature_columns == r.feature_columns);
  }
}

TEST_CASE("two-way branch structure is rotation invariant at K = p") {
  const auto inst = instances::two_way_instance(7, 20, 40, 30);
  TwoWayConfig rot;
  rot.k = 30;
  rot.sample_measure = Measure::covariance;
  TwoWayConfig ident = rot;
  ident.profiles = ProfileBasis::identity;
  const auto a = two_way_classify(inst.samples, inst.train_rows, inst.train_labels,
                                  inst.test_rows, inst.test_labels, rot);
  const auto b = two_way_classify(inst.samples, inst.train_rows, inst.train_labels,
                                  inst.test_rows, inst.test_labels, ident);
  CHECK(a.branch_assignment == b.branch_assignment);
}

TEST_CASE("two-way degenerate input") {
  const DataMatrix same(8, 4, std::vector<double>(32, 1.5));
  const std::vector<std::size_t> train{0, 1, 2, 3}, test{4, 5, 6, 7};
  const std::vector<int> tl{0, 1, 0, 1}, sl{0, 1, 0, 1};
  const auto r = two_way_classify(same, train, tl, test, sl, TwoWayConfig{});
  CHECK((r.flags.empty_branch || r.flags.vote_tie));
  CHECK(r.sample_tree.flags.near_zero_similarity);

  CHECK_THROWS_AS(two_way_classify(same, train, std::vector<int>{0, 0, 0, 0}, test, sl,
                                   TwoWayConfig{}),
                  InputError);
  TwoWayConfig big;
  big.k = 5;
  CHECK_THROWS_AS(two_way_classify(same, train, tl, test, sl, big), InputError);
}
