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

#include "treelets/pipelines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "parallel.hpp"
#include "treelets/error.hpp"

namespace treelets {

namespace {

constexpr double kRidge = 1e-8;

void fit_model(FoldModel& model, std::span<const double> y_train) {
  const FeatureSet& fs = model.features;
  const std::size_t n = fs.rows;
  const std::size_t k = fs.k();
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> f(
      fs.coefficients.data(), n, k);
  Eigen::Map<const Eigen::VectorXd> y(y_train.data(), n);

  if (model.task == Task::regression) {
    const Eigen::RowVectorXd f_mean = f.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd fc = f.rowwise() - f_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;
    Eigen::MatrixXd gram = fc.transpose() * fc;
    const double trace = gram.trace();
    const double lambda = kRidge * (trace > 0.0 ? trace / static_cast<double>(k) : 1.0);
    gram.diagonal().array() += lambda;
    const Eigen::VectorXd w = gram.ldlt().solve(fc.transpose() * yc);
    model.weights.assign(w.data(), w.data() + k);
    model.intercept = y_mean - f_mean.dot(w);
    return;
  }

  std::set<double> distinct(y_train.begin(), y_train.end());
  model.labels.assign(distinct.begin(), distinct.end());
  model.centroids.assign(model.labels.size() * k, 0.0);
  std::vector<std::size_t> counts(model.labels.size(), 0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto c = static_cast<std::size_t>(
        std::lower_bound(model.labels.begin(), model.labels.end(), y_train[r]) -
        model.labels.begin());
    ++counts[c];
    for (std::size_t f_i = 0; f_i < k; ++f_i)
      model.centroids[c * k + f_i] += fs.coefficients[r * k + f_i];
  }
  for (std::size_t c = 0; c < model.labels.size(); ++c)
    for (std::size_t f_i = 0; f_i < k; ++f_i)
      model.centroids[c * k + f_i] /= static_cast<double>(counts[c]);
}

FoldModel fit_with_tree(const DataMatrix& train, std::span<const double> y_train,
                        const TreeletTree& tree, const TreeletBasis& basis, std::size_t k,
                        Task task) {
  FoldModel model;
  model.task = task;
  model.tree = tree;
  model.features = top_k_features(basis, train, k);
  fit_model(model, y_train);
  return model;
}

void check_grid(const PipelineConfig& config, std::size_t p) {
  if (config.level_grid.empty() || config.k_grid.empty()) {
    throw InputError("level and K grids must be non-empty");
  }
  for (std::size_t l : config.level_grid)
    if (l < 1 || l > p - 1) throw InputError("level " + std::to_string(l) + " outside [1, p-1]");
  for (std::size_t k : config.k_grid)
    if (k < 1 || k > p) throw InputError("K " + std::to_string(k) + " outside [1, p]");
}

double held_out_score(const FoldModel& model, const DataMatrix& x, std::span<const double> y,
                      std::span<const std::size_t> rows) {
  if (model.task == Task::classification) {
    std::size_t hits = 0;
    for (std::size_t r : rows) hits += model.predict(x.row(r)) == y[r] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(rows.size());
  }
  double mean = 0.0;
  for (std::size_t r : rows) mean += y[r];
  mean /= static_cast<double>(rows.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t r : rows) {
    const double e = y[r] - model.predict(x.row(r));
    sse += e * e;
    sst += (y[r] - mean) * (y[r] - mean);
  }
  return 1.0 - sse / sst;
}

}  // namespace

std::string_view to_string(Task t) {
  return t == Task::regression ? "regression" : "classification";
}

Task parse_task(std::string_view text) {
  if (text == "regression") return Task::regression;
  if (text == "classification") return Task::classification;
  throw InputError("unknown task '" + std::string(text) +
                   "' (expected regression or classification)");
}

double FoldModel::predict(std::span<const double> x) const {
  const std::vector<double> f = features.project(x);
  if (task == Task::regression) {
    double v = intercept;
    for (std::size_t i = 0; i < f.size(); ++i) v += weights[i] * f[i];
    return v;
  }
  const std::size_t k = f.size();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < labels.size(); ++c) {
    double d = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double diff = f[i] - centroids[c * k + i];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return labels[best];
}

FoldModel fit_fold(const DataMatrix& x, std::span<const double> y,
                   std::span<const std::size_t> train_rows, std::size_t level, std::size_t k,
                   const PipelineConfig& config) {
  if (y.size() != x.rows()) throw InputError("response length does not match row count");
  const DataMatrix train = x.select_rows(train_rows);
  std::vector<double> y_train;
  for (std::size_t r : train_rows) y_train.push_back(y[r]);
  BuildOptions options;
  options.measure = config.measure;
  options.level = level;
  const TreeletTree tree = build_tree(train, options);
  return fit_with_tree(train, y_train, tree, basis_at_level(tree, level), k, config.task);
}

std::vector<std::size_t> fold_assignment(std::size_t rows, std::size_t folds,
                                         std::uint64_t seed) {
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  // Explicit Fisher-Yates: std::shuffle's draw sequence is not portable.
  std::mt19937_64 engine(seed);
  for (std::size_t i = rows; i > 1; --i) std::swap(order[i - 1], order[engine() % i]);
  std::vector<std::size_t> fold(rows);
  for (std::size_t pos = 0; pos < rows; ++pos) fold[order[pos]] = pos % folds;
  return fold;
}

CvResult cv_select(const DataMatrix& x, std::span<const double> y, const PipelineConfig& config) {
  const std::size_t n = x.rows();
  if (y.size() != n) throw InputError("response length does not match row count");
  if (config.folds < 2 || config.folds > n) throw InputError("fold count must lie in [2, n]");
  for (double v : y)
    if (!std::isfinite(v)) throw InputError("response has a non-finite value");
  check_grid(config, x.cols());

  const auto assignment = fold_assignment(n, config.folds, config.seed);
  const std::size_t levels = config.level_grid.size();
  const std::size_t ks = config.k_grid.size();
  const std::size_t max_level =
      *std::max_element(config.level_grid.begin(), config.level_grid.end());

  std::vector<std::vector<double>> scores(config.folds);
  std::vector<std::string> skip_reason(config.folds);
  detail::parallel_for(config.folds, [&](std::size_t f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t r = 0; r < n; ++r) (assignment[r] == f ? test_rows : train_rows).push_back(r);
    std::vector<double> y_train;
    for (std::size_t r : train_rows) y_train.push_back(y[r]);

    const std::set<double> train_values(y_train.begin(), y_train.end());
    if (train_rows.size() < 2 || test_rows.empty()) {
      skip_reason[f] = "too few rows";
      return;
    }
    if (config.task == Task::classification && train_values.size() < 2) {
      skip_reason[f] = "single class in training rows";
      return;
    }
    if (config.task == Task::regression) {
      if (train_values.size() < 2) {
        skip_reason[f] = "constant response in training rows";
        return;
      }
      const double first = y[test_rows.front()];
      if (std::all_of(test_rows.begin(), test_rows.end(),
                      [&](std::size_t r) { return y[r] == first; })) {
        skip_reason[f] = "constant response in held-out rows";
        return;
      }
    }

    const DataMatrix train = x.select_rows(train_rows);
    BuildOptions options;
    options.measure = config.measure;
    options.level = max_level;
    const TreeletTree tree = build_tree(train, options);
    scores[f].assign(levels * ks, 0.0);
    for (std::size_t li = 0; li < levels; ++li) {
      const TreeletBasis basis = basis_at_level(tree, config.level_grid[li]);
      for (std::size_t ki = 0; ki < ks; ++ki) {
        const FoldModel model =
            fit_with_tree(train, y_train, tree, basis, config.k_grid[ki], config.task);
        scores[f][li * ks + ki] = held_out_score(model, x, y, test_rows);
      }
    }
  });

  CvResult result;
  std::size_t used = 0;
  for (std::size_t f = 0; f < config.folds; ++f) {
    if (scores[f].empty()) {
      result.skipped_folds.push_back(f);
      result.warnings.push_back("fold " + std::to_string(f) + " skipped: " + skip_reason[f]);
    } else {
      ++used;
    }
  }
  if (used == 0) throw InputError("every cross-validation fold is degenerate");

  bool have_best = false;
  for (std::size_t li = 0; li < levels; ++li) {
    for (std::size_t ki = 0; ki < ks; ++ki) {
      double mean = 0.0;
      for (std::size_t f = 0; f < config.folds; ++f)
        if (!scores[f].empty()) mean += scores[f][li * ks + ki];
      mean /= static_cast<double>(used);
      const GridScore g{config.level_grid[li], config.k_grid[ki], mean};
      result.grid.push_back(g);
      const bool better =
          !have_best || g.score > result.cv_score ||
          (g.score == result.cv_score &&
           (g.k < result.best_k || (g.k == result.best_k && g.level < result.best_level)));
      if (better) {
        have_best = true;
        result.best_level = g.level;
        result.best_k = g.k;
        result.cv_score = g.score;
      }
    }
  }
  return result;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> two_branch_cut(
    const TreeletTree& tree) {
  if (!tree.is_full()) throw InputError("branch cut needs a full-level tree");
  std::vector<std::vector<std::size_t>> members(tree.p);
  for (std::size_t i = 0; i < tree.p; ++i) members[i] = {i};
  for (std::size_t k = 0; k + 1 < tree.rotations.size(); ++k) {
    const RotationRecord& r = tree.rotations[k];
    auto& a = members[r.sum_index];
    auto& b = members[r.detail_index];
    a.insert(a.end(), b.begin(), b.end());
    b.clear();
  }
  const RotationRecord& root = tree.rotations.back();
  auto branch0 = members[root.sum_index];
  auto branch1 = members[root.detail_index];
  std::sort(branch0.begin(), branch0.end());
  std::sort(branch1.begin(), branch1.end());
  return {std::move(branch0), std::move(branch1)};
}

TwoWayResult two_way_classify(const DataMatrix& samples, std::span<const std::size_t> train_rows,
                              std::span<const int> train_labels,
                              std::span<const std::size_t> test_rows,
                              std::span<const int> test_labels, const TwoWayConfig& config) {
  const std::size_t n_all = samples.rows();
  const std::size_t p = samples.cols();
  if (train_rows.size() != train_labels.size() || test_rows.size() != test_labels.size()) {
    throw InputError("row and label lists must have equal length");
  }
  for (std::size_t r : train_rows)
    if (r >= n_all) throw InputError("training row " + std::to_string(r) + " out of range");
  for (std::size_t r : test_rows)
    if (r >= n_all) throw InputError("test row " + std::to_string(r) + " out of range");
  const std::set<int> classes(train_labels.begin(), train_labels.end());
  if (classes.size() != 2) throw InputError("training labels must contain exactly two classes");
  if (config.profiles == ProfileBasis::treelet && (config.k < 2 || config.k > p)) {
    throw InputError("K must lie in [2, p] for the two-way scheme");
  }

  TwoWayResult result;
  const DataMatrix train = samples.select_rows(train_rows);
  std::vector<double> mean(p, 0.0);
  for (std::size_t r = 0; r < train.rows(); ++r)
    for (std::size_t j = 0; j < p; ++j) mean[j] += train(r, j);
  for (double& m : mean) m /= static_cast<double>(train.rows());

  BuildOptions var_options;
  var_options.measure = config.variable_measure;
  var_options.level = config.level;
  result.variable_tree = build_tree(train, var_options);

  std::size_t k = p;
  std::optional<FeatureSet> features;
  if (config.profiles == ProfileBasis::treelet) {
    features = top_k_features(result.variable_tree, train, result.variable_tree.levels(),
                              config.k);
    result.feature_columns = features->columns;
    k = config.k;
  }

  // Profiles stored feature-major: profile[f * n_all + i].
  std::vector<double> profile(k * n_all);
  std::vector<double> centered(p);
  for (std::size_t i = 0; i < n_all; ++i) {
    for (std::size_t j = 0; j < p; ++j) centered[j] = samples(i, j) - mean[j];
    const std::vector<double> z = features ? features->project(centered) : centered;
    for (std::size_t f = 0; f < k; ++f) profile[f * n_all + i] = z[f];
  }
  if (config.sample_measure == Measure::correlation) {
    for (std::size_t f = 0; f < k; ++f) {
      double ss = 0.0;
      for (std::size_t i = 0; i < n_all; ++i) ss += profile[f * n_all + i] * profile[f * n_all + i];
      const double rms = std::sqrt(ss / static_cast<double>(n_all));
      if (rms > 0.0)
        for (std::size_t i = 0; i < n_all; ++i) profile[f * n_all + i] /= rms;
    }
  }

  const DataMatrix by_sample(k, n_all, std::move(profile), default_names(n_all, "r"));
  result.sample_tree = build_tree_from_state(
      compute_state(by_sample, config.sample_measure, Centering::none), BuildOptions{});

  const auto [branch0, branch1] = two_branch_cut(result.sample_tree);
  result.branch_assignment.assign(n_all, 0);
  for (std::size_t i : branch1) result.branch_assignment[i] = 1;

  const int cls[2] = {*classes.begin(), *classes.rbegin()};
  std::size_t votes[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t t = 0; t < train_rows.size(); ++t) {
    const int b = result.branch_assignment[train_rows[t]];
    ++votes[b][train_labels[t] == cls[0] ? 0 : 1];
  }
  bool labeled[2] = {false, false};
  for (int b = 0; b < 2; ++b) {
    const std::size_t v0 = votes[b][0];
    const std::size_t v1 = votes[b][1];
    if (v0 + v1 == 0) continue;
    labeled[b] = true;
    if (v0 == v1) result.flags.vote_tie = true;
    result.class_of_branch[b] = v1 > v0 ? cls[1] : cls[0];
  }
  for (int b = 0; b < 2; ++b) {
    if (labeled[b]) continue;
    result.flags.empty_branch = true;
    const int other = result.class_of_branch[1 - b];
    result.class_of_branch[b] = other == cls[0] ? cls[1] : cls[0];
  }

  result.predicted.resize(n_all);
  for (std::size_t i = 0; i < n_all; ++i)
    result.predicted[i] = result.class_of_branch[result.branch_assignment[i]];
  std::size_t wrong = 0;
  for (std::size_t t = 0; t < test_rows.size(); ++t)
    wrong += result.predicted[test_rows[t]] != test_labels[t] ? 1 : 0;
  result.test_error =
      test_rows.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(test_rows.size());
  return result;
}

}  // namespace treelets
