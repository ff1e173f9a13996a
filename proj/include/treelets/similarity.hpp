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

#include <cmath>
#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "treelets/data_matrix.hpp"

namespace treelets {

enum class Measure { covariance, correlation };

std::string_view to_string(Measure m);
/// Accepts "covariance" / "correlation"; throws InputError otherwise.
Measure parse_measure(std::string_view text);

/// How compute_state removes the mean before forming second moments.
enum class Centering {
  column_means,  ///< subtract each variable's mean (ordinary covariance)
  none,          ///< raw second moments (1/n) X^T X
};

struct RotationRecord;

/// Second-order statistics guiding the merges, plus the active set.
///
/// `cov` is stored as a full row-major p x p matrix; every write is mirrored
/// so the matrix is exactly symmetric. Covariances use the 1/n normalization.
/// Using 1/(n-1) would scale every entry by the same factor and leave every
/// pair choice unchanged under both measures.
class SimilarityState {
 public:
  /// State from an explicit covariance matrix (row-major p x p, symmetric).
  SimilarityState(std::size_t p, std::vector<double> cov, Measure measure,
                  std::vector<double> means = {});

  std::size_t size() const { return p_; }
  Measure measure() const { return measure_; }

  double cov(std::size_t i, std::size_t j) const { return cov_[i * p_ + j]; }
  const double* cov_row(std::size_t i) const { return cov_.data() + i * p_; }
  const std::vector<double>& cov_matrix() const { return cov_; }
  const std::vector<double>& means() const { return means_; }

  bool is_active(std::size_t i) const { return i < p_ && active_[i] != 0; }
  std::size_t active_count() const { return active_count_; }
  std::vector<std::size_t> active_indices() const;

  /// Signed similarity. Correlation is clamped to [-1, 1]; a zero-variance
  /// variable has similarity 0 with everything.
  double similarity(std::size_t i, std::size_t j) const;

  /// |similarity(i, j)| computed exactly as the pair-search kernels do.
  double abs_similarity(std::size_t i, std::size_t j) const {
    double v = std::abs(cov_[i * p_ + j]) * (weight_[i] * weight_[j]);
    return v < cap_ ? v : cap_;
  }

  /// Kernel inputs: per-variable weight (0 once retired), bias (0 active,
  /// -2 retired) and the clamp.
  const double* weights() const { return mask_weight_.data(); }
  const double* biases() const { return bias_.data(); }
  double row_weight(std::size_t i) const { return weight_[i]; }
  double cap() const { return cap_; }

  /// Rotates the alpha/beta rows and columns and retires the detail index.
  /// Throws InconsistentRotationError when the angle does not diagonalize the
  /// current 2x2 block.
  void apply(const RotationRecord& rot);

 private:
  void refresh_weight(std::size_t i);

  std::size_t p_;
  Measure measure_;
  std::vector<double> cov_;
  std::vector<double> means_;
  std::vector<unsigned char> active_;
  std::size_t active_count_;
  std::vector<double> weight_;       // 1 (covariance) or 1/sd (correlation)
  std::vector<double> mask_weight_;  // weight_, zeroed once retired
  std::vector<double> bias_;
  double cap_;
};

/// (1/n) sum_k (X_ki - m_i)(X_kj - m_j); all variables active.
SimilarityState compute_state(const DataMatrix& x, Measure measure,
                              Centering centering = Centering::column_means);

/// Free-function form of SimilarityState::similarity with index checks.
double similarity(const SimilarityState& state, std::size_t i, std::size_t j);

/// Exhaustive O(p^2) scan for the active pair with the largest |similarity|.
/// Ties go to the smallest i, then the smallest j. Returns (i, j) with i < j.
std::pair<std::size_t, std::size_t> max_similar_pair(const SimilarityState& state);

/// Copying form of SimilarityState::apply.
SimilarityState merge_update(SimilarityState state, const RotationRecord& rot);

/// Row-maximum cache over the upper triangle, kept in sync with a state so
/// each level's pair search costs O(p) instead of O(p^2).
///
/// Row i caches the best j > i. After a merge only entries in the two rotated
/// rows/columns change: rows whose cached best was one of the merged indices
/// are rescanned (lazy repair), every other row compares its cache against
/// the single changed entry. The worst case, when many rows point at the
/// merged pair, degrades to O(p^2) for that level.
class PairCache {
 public:
  explicit PairCache(const SimilarityState& state);

  /// Same pair max_similar_pair would return for the synced state.
  std::pair<std::size_t, std::size_t> best() const;

  /// Call after state.apply(rot).
  void update(const SimilarityState& state, std::size_t sum_index, std::size_t detail_index);

  /// Rows rescanned so far; exposed for the timing harness.
  std::size_t rescans() const { return rescans_; }

 private:
  void rescan(const SimilarityState& state, std::size_t row);

  std::vector<std::size_t> best_index_;
  std::vector<double> best_value_;
  std::vector<unsigned char> live_;
  std::size_t rescans_ = 0;
};

}  // namespace treelets
