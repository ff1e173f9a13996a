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
#include <span>
#include <vector>

#include "treelets/data_matrix.hpp"
#include "treelets/tree.hpp"

namespace treelets {

enum class FunctionKind { scaling, detail };

/// Orthonormal basis after the first `level` merges of a tree.
///
/// Column k is the function attached to variable slot k. Slots still active
/// at this level hold scaling functions; retired slots hold detail functions.
/// Each column is oriented so its largest-magnitude entry (first one on ties)
/// is positive.
class TreeletBasis {
 public:
  std::size_t size() const { return p_; }
  std::size_t level() const { return level_; }

  /// Entry i of basis column k.
  double loading(std::size_t i, std::size_t k) const { return functions_[k * p_ + i]; }
  std::span<const double> column(std::size_t k) const { return {functions_.data() + k * p_, p_}; }

  FunctionKind kind(std::size_t k) const { return kinds_[k]; }
  /// Level at which slot k was retired; 0 for scaling columns.
  std::size_t origin_level(std::size_t k) const { return origin_[k]; }

  /// Scaling columns in ascending slot order.
  const std::vector<std::size_t>& scaling_columns() const { return scaling_; }
  /// Detail columns in retirement order.
  const std::vector<std::size_t>& detail_columns() const { return detail_; }

  /// +1/-1 orientation applied to each raw rotated column.
  const std::vector<double>& signs() const { return signs_; }
  const std::vector<RotationRecord>& rotations() const { return rotations_; }

 private:
  friend TreeletBasis basis_at_level(const TreeletTree& tree, std::size_t level);

  std::size_t p_ = 0;
  std::size_t level_ = 0;
  std::vector<double> functions_;  // row k = column k of the loading matrix
  std::vector<FunctionKind> kinds_;
  std::vector<std::size_t> origin_;
  std::vector<std::size_t> scaling_;
  std::vector<std::size_t> detail_;
  std::vector<double> signs_;
  std::vector<RotationRecord> rotations_;
};

/// Expansion of one observation: scaling coefficients (ordered as
/// scaling_columns()) and detail coefficients (ordered as detail_columns()).
struct Coefficients {
  std::vector<double> s;
  std::vector<double> d;

  std::size_t size() const { return s.size() + d.size(); }
};

/// Product of the first `level` rotations applied to the identity.
TreeletBasis basis_at_level(const TreeletTree& tree, std::size_t level);

/// Inner products with the materialized basis columns.
Coefficients forward(const TreeletBasis& basis, std::span<const double> x);
/// sum_k c_k * column_k.
std::vector<double> inverse(const TreeletBasis& basis, const Coefficients& c);

/// Same transforms by replaying the 2x2 rotations on the vector itself;
/// never touches the p x p loading matrix.
Coefficients forward_replay(const TreeletBasis& basis, std::span<const double> x);
std::vector<double> inverse_replay(const TreeletBasis& basis, const Coefficients& c);

/// All coefficients of every row, indexed by basis column (n x p row-major).
std::vector<double> coefficient_matrix(const TreeletBasis& basis, const DataMatrix& x);

/// The K basis columns whose coefficients have the largest sample variance.
struct FeatureSet {
  std::size_t level = 0;
  std::size_t p = 0;
  std::size_t rows = 0;
  std::vector<std::size_t> columns;   ///< ranked, highest variance first
  std::vector<FunctionKind> kinds;
  std::vector<std::size_t> origin_levels;
  std::vector<double> variances;      ///< 1/n sample variance of each coefficient
  std::vector<double> loadings;       ///< K x p, row f = basis column columns[f]
  std::vector<double> coefficients;   ///< rows x K

  std::size_t k() const { return columns.size(); }
  /// Coefficients of an arbitrary p-vector on the selected columns.
  std::vector<double> project(std::span<const double> x) const;
};

/// Ranks all p coefficients of X at `level` by variance (ties by column
/// index) and keeps the top K. Throws InputError if K is not in [1, p].
FeatureSet top_k_features(const TreeletTree& tree, const DataMatrix& x, std::size_t level,
                          std::size_t k);

/// Same ranking on a prepared basis.
FeatureSet top_k_features(const TreeletBasis& basis, const DataMatrix& x, std::size_t k);

}  // namespace treelets
