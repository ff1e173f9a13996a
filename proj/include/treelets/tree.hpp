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
#include <optional>
#include <vector>

#include "treelets/data_matrix.hpp"
#include "treelets/similarity.hpp"

namespace treelets {

/// One merge of the hierarchy: variables alpha < beta were rotated by theta,
/// sum_index continues up the tree, detail_index is retired.
struct RotationRecord {
  std::size_t level = 0;
  std::size_t alpha = 0;
  std::size_t beta = 0;
  double theta = 0.0;
  std::size_t sum_index = 0;
  std::size_t detail_index = 0;

  friend bool operator==(const RotationRecord&, const RotationRecord&) = default;
};

/// Angle and orientation that diagonalize a 2x2 covariance block.
struct PairRotation {
  double theta;        ///< |theta| <= pi/4
  bool sum_is_beta;    ///< false: alpha carries the sum variable
  double var_alpha;    ///< post-rotation variance of the alpha coordinate
  double var_beta;
};

/// theta = atan2(2 c_ab, c_aa - c_bb) / 2 folded into [-pi/4, pi/4]. The
/// rotated coordinate with the larger variance is the sum; ties go to alpha.
PairRotation pair_rotation(double c_aa, double c_bb, double c_ab);

struct TreeFlags {
  /// Some merge had best |similarity| at numerical zero, so the choice was
  /// decided by the tie rule alone.
  bool near_zero_similarity = false;
  /// The build stopped early on BuildOptions::stop_below.
  bool early_stopped = false;

  friend bool operator==(const TreeFlags&, const TreeFlags&) = default;
};

struct TreeletTree {
  std::size_t p = 0;
  Measure measure = Measure::correlation;
  std::vector<RotationRecord> rotations;
  TreeFlags flags;

  std::size_t levels() const { return rotations.size(); }
  bool is_full() const { return p >= 1 && rotations.size() == p - 1; }
  /// Indices still active after every recorded merge, ascending.
  std::vector<std::size_t> root_active() const;

  friend bool operator==(const TreeletTree&, const TreeletTree&) = default;
};

struct BuildOptions {
  Measure measure = Measure::correlation;
  /// Number of merges; empty means full (p - 1).
  std::optional<std::size_t> level;
  /// Stop once the best |similarity| drops below this value. Off by default.
  std::optional<double> stop_below;
  Centering centering = Centering::column_means;
};

enum class PairSearch { incremental, exhaustive };

/// Greedy hierarchy with the cached O(p)-per-level pair search.
TreeletTree build_tree(const DataMatrix& x, const BuildOptions& options);

/// Same contract, exhaustive O(p^2) pair search at every level. Reference
/// path for equivalence tests and the timing baseline.
TreeletTree build_tree_naive(const DataMatrix& x, const BuildOptions& options);

/// Runs the hierarchy from a prepared state (e.g. an exact population
/// covariance). options.measure and options.centering are ignored; the
/// state's own measure is used.
TreeletTree build_tree_from_state(SimilarityState state, const BuildOptions& options,
                                  PairSearch search = PairSearch::incremental);

/// Checks the structural invariants of a tree (index ranges, consecutive
/// levels, retired indices never reused). Throws InputError on violation.
void validate_tree(const TreeletTree& tree);

}  // namespace treelets
