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
#include <vector>

#include "treelets/data_matrix.hpp"

namespace treelets {

/// Wall-clock comparison of the exhaustive and cached pair searches on one
/// problem size. Both builds start from the same precomputed state, so the
/// covariance cost is reported separately and excluded from the ratio.
struct TimingRow {
  std::size_t p = 0;
  std::size_t n = 0;
  double covariance_seconds = 0.0;
  double naive_seconds = 0.0;
  double incremental_seconds = 0.0;
  double ratio = 0.0;            ///< naive / incremental
  bool identical_trees = false;  ///< both paths produced the same tree
};

/// iid standard normal n x p data from the seed.
DataMatrix gaussian_matrix(std::size_t n, std::size_t p, std::uint64_t seed);

/// Full-level builds timed `repeats` times each; the minimum is reported.
TimingRow time_tree_builds(std::size_t p, std::size_t n, std::uint64_t seed,
                           std::size_t repeats);

std::vector<TimingRow> timing_table(const std::vector<std::size_t>& p_list, std::size_t n,
                                    std::uint64_t seed, std::size_t repeats);

}  // namespace treelets
