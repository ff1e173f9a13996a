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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treelets/basis.hpp"
#include "treelets/data_matrix.hpp"
#include "treelets/tree.hpp"

namespace treelets {

enum class Task { regression, classification };

std::string_view to_string(Task t);
Task parse_task(std::string_view text);

struct PipelineConfig {
  Measure measure = Measure::correlation;
  std::vector<std::size_t> level_grid;
  std::vector<std::size_t> k_grid;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  Task task = Task::regression;
};

/// Downstream model on treelet features, fitted from training rows only.
///
/// Regression: least squares with intercept and a ridge of
/// 1e-8 * trace(F^T F) / K for numerical safety. Classification: nearest
/// class centroid in feature space (ties to the smaller label).
struct FoldModel {
  Task task = Task::regression;
  TreeletTree tree;
  FeatureSet features;
  std::vector<double> weights;
  double intercept = 0.0;
  std::vector<double> labels;     ///< sorted class labels
  std::vector<double> centroids;  ///< labels.size() x K

  double predict(std::span<const double> x) const;
};

/// Builds the tree, ranks features and fits the model on x's train_rows.
/// Rows outside train_rows are never read.
FoldModel fit_fold(const DataMatrix& x, std::span<const double> y,
                   std::span<const std::size_t> train_rows, std::size_t level, std::size_t k,
                   const PipelineConfig& config);

/// Fold id for every row: a seeded shuffle dealt round-robin.
std::vector<std::size_t> fold_assignment(std::size_t rows, std::size_t folds,
                                         std::uint64_t seed);

struct GridScore {
  std::size_t level = 0;
  std::size_t k = 0;
  double score = 0.0;
};

struct CvResult {
  std::size_t best_level = 0;
  std::size_t best_k = 0;
  double cv_score = 0.0;
  std::vector<GridScore> grid;
  std::vector<std::size_t> skipped_folds;
  std::vector<std::string> warnings;
};

/// Mean held-out score (R^2 or accuracy) for every (level, K); best wins,
/// ties to smaller K then smaller level. Degenerate folds are skipped with a
/// warning; InputError if every fold is degenerate.
CvResult cv_select(const DataMatrix& x, std::span<const double> y, const PipelineConfig& config);

/// Leaves under the two children of the root of a full tree. branch0 holds
/// the final merge's sum side, branch1 its detail side; both sorted.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> two_branch_cut(
    const TreeletTree& tree);

enum class ProfileBasis {
  treelet,   ///< K maximum-variance treelet features
  identity,  ///< raw centered variables (reference run)
};

struct TwoWayConfig {
  std::size_t k = 2;
  std::optional<std::size_t> level;  ///< variable-tree level; empty = full
  Measure variable_measure = Measure::correlation;
  Measure sample_measure = Measure::correlation;
  ProfileBasis profiles = ProfileBasis::treelet;
};

struct TwoWayFlags {
  bool empty_branch = false;  ///< a branch had no labeled member
  bool vote_tie = false;      ///< a branch vote tied
};

struct TwoWayResult {
  std::vector<int> branch_assignment;  ///< per sample, 0 or 1
  int class_of_branch[2] = {0, 0};
  std::vector<int> predicted;
  double test_error = 0.0;
  TwoWayFlags flags;
  TreeletTree variable_tree;
  TreeletTree sample_tree;
  std::vector<std::size_t> feature_columns;
};

/// Semi-supervised two-way scheme:
///  1. variable tree and feature ranking on the training rows only;
///  2. every sample centered on the training means and projected onto the
///     K maximum-variance features;
///  3. a second tree over samples (samples as variables, features as
///     observations) on raw second moments;
///  4. the root's two branches, each labeled by majority vote of its
///     training members;
///  5. error over the test rows.
TwoWayResult two_way_classify(const DataMatrix& samples, std::span<const std::size_t> train_rows,
                              std::span<const int> train_labels,
                              std::span<const std::size_t> test_rows,
                              std::span<const int> test_labels, const TwoWayConfig& config);

}  // namespace treelets
