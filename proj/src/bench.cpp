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

#include "treelets/bench.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <optional>

#include "treelets/error.hpp"
#include "treelets/random.hpp"
#include "treelets/tree.hpp"

namespace treelets {

namespace {

template <class F>
double min_seconds(std::size_t repeats, F&& f) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

// Times only the build; the state copy each run consumes is made beforehand.
double min_build_seconds(std::size_t repeats, const SimilarityState& state,
                         const BuildOptions& options, PairSearch search, TreeletTree& out) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < repeats; ++r) {
    SimilarityState copy = state;
    const auto t0 = std::chrono::steady_clock::now();
    out = build_tree_from_state(std::move(copy), options, search);
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

}  // namespace

DataMatrix gaussian_matrix(std::size_t n, std::size_t p, std::uint64_t seed) {
  NormalStream normal(seed);
  std::vector<double> values(n * p);
  for (double& v : values) v = normal();
  return DataMatrix(n, p, std::move(values));
}

TimingRow time_tree_builds(std::size_t p, std::size_t n, std::uint64_t seed,
                           std::size_t repeats) {
  if (repeats == 0) throw InputError("repeat count must be positive");
  const DataMatrix x = gaussian_matrix(n, p, derive_seed(seed, p));
  BuildOptions options;
  options.measure = Measure::correlation;

  TimingRow row;
  row.p = p;
  row.n = n;
  std::optional<SimilarityState> state;
  row.covariance_seconds =
      min_seconds(repeats, [&] { state.emplace(compute_state(x, options.measure)); });

  TreeletTree naive, incremental;
  row.naive_seconds = min_build_seconds(repeats, *state, options, PairSearch::exhaustive, naive);
  row.incremental_seconds =
      min_build_seconds(repeats, *state, options, PairSearch::incremental, incremental);
  row.ratio = row.naive_seconds / row.incremental_seconds;
  row.identical_trees = naive == incremental;
  return row;
}

std::vector<TimingRow> timing_table(const std::vector<std::size_t>& p_list, std::size_t n,
                                    std::uint64_t seed, std::size_t repeats) {
  std::vector<TimingRow> rows;
  for (std::size_t p : p_list) rows.push_back(time_tree_builds(p, n, seed, repeats));
  return rows;
}

}  // namespace treelets
