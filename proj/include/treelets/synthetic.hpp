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
#include <vector>

#include "treelets/data_matrix.hpp"
#include "treelets/similarity.hpp"
#include "treelets/tree.hpp"

namespace treelets {

using Partition = std::vector<std::vector<std::size_t>>;

/// Block covariance model. Variables are 0-based; every variable belongs to
/// exactly one block (singleton blocks are allowed).
///
/// Population correlation is within_corr inside a block and across_corr
/// between blocks; variable i has signal variance variances[i] (1 when the
/// vector is empty). Observations add independent noise of sd noise_sd.
struct BlockModelSpec {
  std::size_t p = 0;
  Partition partition;
  double within_corr = 0.9;
  double across_corr = 0.0;
  std::vector<double> variances;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
};

/// Blocks {0..b-1}, {b..2b-1}, ...; the last block takes any remainder.
Partition equal_blocks(std::size_t p, std::size_t block_size);

/// Throws InputError when the partition is not disjoint and covering, a
/// parameter is out of range, or the population covariance is not PSD.
void validate(const BlockModelSpec& spec);

/// Exact covariance of what sample() draws (signal plus noise on the
/// diagonal), row-major p x p.
std::vector<double> population_covariance_matrix(const BlockModelSpec& spec);

/// Exact population covariance wrapped as a similarity state.
SimilarityState population_covariance(const BlockModelSpec& spec,
                                      Measure measure = Measure::correlation);

/// n zero-mean Gaussian draws, generated row by row from spec.seed, so the
/// first n rows of a larger sample equal a smaller one.
DataMatrix sample(const BlockModelSpec& spec, std::size_t n);

/// 1 when every merge either stays inside one true block or joins groups that
/// are each unions of complete blocks (blocks form connected subtrees).
/// Otherwise the fraction of within-block merges among the first
/// (p - #blocks) merges.
double recovery_score(const TreeletTree& tree, const Partition& partition);

struct RecoveryResult {
  std::size_t p = 0;
  std::size_t n = 0;
  std::size_t trials = 0;
  double recovered_fraction = 0.0;
};

struct ExperimentTemplate {
  std::size_t block_size = 4;
  double within_corr = 0.9;
  double across_corr = 0.0;
  double variance = 1.0;
  double noise_sd = 0.25;
  Measure measure = Measure::correlation;
  std::size_t n_min = 4;
  std::size_t n_max = 4096;
  std::uint64_t seed = 0;
};

/// Fraction of `trials` seeded replicates (seed per (master, p, trial)) whose
/// full tree recovers the block partition exactly.
RecoveryResult recovery_trials(const ExperimentTemplate& tmpl, std::size_t p, std::size_t n,
                               std::size_t trials);

struct MinSampleRow {
  std::size_t p = 0;
  std::optional<std::size_t> n_star;  ///< empty when censored at n_max
};

struct ExperimentResult {
  double target = 0.0;
  std::size_t trials = 0;
  std::vector<MinSampleRow> rows;
  std::vector<RecoveryResult> grid;  ///< every evaluated (p, n), sorted
};

/// For each p, binary-searches the smallest n in [n_min, n_max] whose
/// recovered fraction reaches `target`.
ExperimentResult min_sample_experiment(const std::vector<std::size_t>& p_list,
                                       const ExperimentTemplate& tmpl, double target,
                                       std::size_t trials);

/// Least-squares slope of log n* against log p over uncensored rows; empty if
/// fewer than two rows qualify.
std::optional<double> log_log_slope(const std::vector<MinSampleRow>& rows);

}  // namespace treelets
