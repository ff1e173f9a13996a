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

#include <filesystem>
#include <string>

#include "treelets/similarity.hpp"
#include "treelets/tree.hpp"

namespace helpers {

/// Rotation record for merging (a, b) in the given state.
inline treelets::RotationRecord merge_record(const treelets::SimilarityState& st, std::size_t a,
                                             std::size_t b, std::size_t level) {
  const auto pr = treelets::pair_rotation(st.cov(a, a), st.cov(b, b), st.cov(a, b));
  treelets::RotationRecord r;
  r.level = level;
  r.alpha = a;
  r.beta = b;
  r.theta = pr.theta;
  r.sum_index = pr.sum_is_beta ? b : a;
  r.detail_index = pr.sum_is_beta ? a : b;
  return r;
}

inline treelets::BuildOptions options(treelets::Measure m) {
  treelets::BuildOptions o;
  o.measure = m;
  return o;
}

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("treelets_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace helpers
