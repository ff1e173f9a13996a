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

#include "treelets/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "treelets/error.hpp"

namespace treelets {

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4.0;
constexpr double kHalfPi = std::numbers::pi / 2.0;

// Best similarity at or below this (relative to the largest active variance
// under the covariance measure) counts as "no signal".
constexpr double kNearZeroSimilarity = 1e-12;

bool near_zero(const SimilarityState& state, double best) {
  if (state.measure() == Measure::correlation) return best <= kNearZeroSimilarity;
  double scale = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i)
    if (state.is_active(i)) scale = std::max(scale, state.cov(i, i));
  return best <= kNearZeroSimilarity * scale;
}

}  // namespace

PairRotation pair_rotation(double c_aa, double c_bb, double c_ab) {
  if (!std::isfinite(c_aa) || !std::isfinite(c_bb) || !std::isfinite(c_ab)) {
    throw InputError("pair rotation needs a finite 2x2 block");
  }
  if (c_aa < 0.0 || c_bb < 0.0) throw InputError("pair rotation needs non-negative variances");
  double theta = 0.5 * std::atan2(2.0 * c_ab, c_aa - c_bb);
  // atan2 gives theta in [-pi/2, pi/2]; a quarter turn swaps the two rotated
  // coordinates, so folding keeps the block diagonal.
  if (theta > kQuarterPi) theta -= kHalfPi;
  if (theta < -kQuarterPi) theta += kHalfPi;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  PairRotation out{};
  out.theta = theta;
  out.var_alpha = c * c * c_aa + 2.0 * c * s * c_ab + s * s * c_bb;
  out.var_beta = s * s * c_aa - 2.0 * c * s * c_ab + c * c * c_bb;
  out.sum_is_beta = out.var_beta > out.var_alpha;
  return out;
}

std::vector<std::size_t> TreeletTree::root_active() const {
  std::vector<unsigned char> retired(p, 0);
  for (const auto& r : rotations) retired[r.detail_index] = 1;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p; ++i)
    if (!retired[i]) out.push_back(i);
  return out;
}

TreeletTree build_tree_from_state(SimilarityState state, const BuildOptions& options,
                                  PairSearch search) {
  const std::size_t p = state.size();
  const std::size_t levels = options.level.value_or(p - 1);
  if (levels < 1 || levels > p - 1) {
    throw InputError("tree level must lie in [1, " + std::to_string(p - 1) + "], got " +
                     std::to_string(levels));
  }
  TreeletTree tree;
  tree.p = p;
  tree.measure = state.measure();
  tree.rotations.reserve(levels);

  std::optional<PairCache> cache;
  if (search == PairSearch::incremental) cache.emplace(state);

  for (std::size_t level = 1; level <= levels; ++level) {
    const auto [i, j] = cache ? cache->best() : max_similar_pair(state);
    const double best = state.abs_similarity(i, j);
    if (options.stop_below && best < *options.stop_below) {
      tree.flags.early_stopped = true;
      break;
    }
    if (near_zero(state, best)) tree.flags.near_zero_similarity = true;

    const PairRotation pr = pair_rotation(state.cov(i, i), state.cov(j, j), state.cov(i, j));
    RotationRecord rec;
    rec.level = level;
    rec.alpha = i;
    rec.beta = j;
    rec.theta = pr.theta;
    rec.sum_index = pr.sum_is_beta ? j : i;
    rec.detail_index = pr.sum_is_beta ? i : j;
    state.apply(rec);
    if (cache) cache->update(state, rec.sum_index, rec.detail_index);
    tree.rotations.push_back(rec);
  }
  return tree;
}

TreeletTree build_tree(const DataMatrix& x, const BuildOptions& options) {
  return build_tree_from_state(compute_state(x, options.measure, options.centering), options,
                               PairSearch::incremental);
}

TreeletTree build_tree_naive(const DataMatrix& x, const BuildOptions& options) {
  return build_tree_from_state(compute_state(x, options.measure, options.centering), options,
                               PairSearch::exhaustive);
}

void validate_tree(const TreeletTree& tree) {
  if (tree.p < 2) throw InputError("tree must cover at least 2 variables");
  if (tree.rotations.size() > tree.p - 1) throw InputError("tree has more than p - 1 rotations");
  std::vector<unsigned char> retired(tree.p, 0);
  for (std::size_t k = 0; k < tree.rotations.size(); ++k) {
    const RotationRecord& r = tree.rotations[k];
    const std::string where = "rotation " + std::to_string(k) + ": ";
    if (r.level != k + 1) throw InputError(where + "levels must be consecutive from 1");
    if (r.alpha >= tree.p || r.beta >= tree.p || r.alpha == r.beta) {
      throw InputError(where + "pair indices out of range");
    }
    if (retired[r.alpha] || retired[r.beta]) throw InputError(where + "uses a retired variable");
    if (!((r.sum_index == r.alpha && r.detail_index == r.beta) ||
          (r.sum_index == r.beta && r.detail_index == r.alpha))) {
      throw InputError(where + "sum/detail indices do not match the pair");
    }
    if (!std::isfinite(r.theta) || std::abs(r.theta) > kQuarterPi + 1e-15) {
      throw InputError(where + "angle outside [-pi/4, pi/4]");
    }
    retired[r.detail_index] = 1;
  }
}

}  // namespace treelets
