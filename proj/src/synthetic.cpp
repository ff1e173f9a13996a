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

#include "treelets/synthetic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "parallel.hpp"
#include "treelets/error.hpp"
#include "treelets/random.hpp"

namespace treelets {

namespace {

std::vector<std::size_t> block_of(std::size_t p, const Partition& partition) {
  std::vector<std::size_t> owner(p, partition.size());
  for (std::size_t b = 0; b < partition.size(); ++b) {
    if (partition[b].empty()) throw InputError("partition has an empty block");
    for (std::size_t i : partition[b]) {
      if (i >= p) throw InputError("partition index " + std::to_string(i) + " out of range");
      if (owner[i] != partition.size()) {
        throw InputError("variable " + std::to_string(i) + " appears in two blocks");
      }
      owner[i] = b;
    }
  }
  for (std::size_t i = 0; i < p; ++i)
    if (owner[i] == partition.size())
      throw InputError("variable " + std::to_string(i) + " is not in any block");
  return owner;
}

double variance_of(const BlockModelSpec& spec, std::size_t i) {
  return spec.variances.empty() ? 1.0 : spec.variances[i];
}

// Signal covariance without the noise term.
std::vector<double> signal_covariance(const BlockModelSpec& spec,
                                      const std::vector<std::size_t>& owner) {
  const std::size_t p = spec.p;
  std::vector<double> cov(p * p);
  for (std::size_t i = 0; i < p; ++i) {
    const double si = std::sqrt(variance_of(spec, i));
    for (std::size_t j = 0; j < p; ++j) {
      const double sj = std::sqrt(variance_of(spec, j));
      double rho = i == j ? 1.0 : (owner[i] == owner[j] ? spec.within_corr : spec.across_corr);
      cov[i * p + j] = i == j ? variance_of(spec, i) : rho * si * sj;
    }
  }
  return cov;
}

// 0 <= across <= within <= 1 admits the one-factor-per-block representation
// used by the sampler, which is PSD by construction.
bool factor_form(const BlockModelSpec& spec) {
  return spec.across_corr >= 0.0 && spec.across_corr <= spec.within_corr &&
         spec.within_corr <= 1.0;
}

}  // namespace

Partition equal_blocks(std::size_t p, std::size_t block_size) {
  if (block_size == 0) throw InputError("block size must be positive");
  Partition out;
  for (std::size_t start = 0; start < p; start += block_size) {
    std::vector<std::size_t> block;
    for (std::size_t i = start; i < std::min(p, start + block_size); ++i) block.push_back(i);
    out.push_back(std::move(block));
  }
  if (out.size() > 1 && out.back().size() < block_size) {
    auto tail = std::move(out.back());
    out.pop_back();
    out.back().insert(out.back().end(), tail.begin(), tail.end());
  }
  return out;
}

void validate(const BlockModelSpec& spec) {
  if (spec.p < 2) throw InputError("block model needs p >= 2");
  const auto owner = block_of(spec.p, spec.partition);
  if (!(spec.within_corr > 0.0 && spec.within_corr <= 1.0)) {
    throw InputError("within_corr must lie in (0, 1]");
  }
  if (!(spec.across_corr >= -1.0 && spec.across_corr <= 1.0)) {
    throw InputError("across_corr must lie in [-1, 1]");
  }
  if (!spec.variances.empty()) {
    if (spec.variances.size() != spec.p) throw InputError("variances must have length p");
    for (double v : spec.variances)
      if (!(v > 0.0) || !std::isfinite(v)) throw InputError("variances must be positive");
  }
  if (!(spec.noise_sd >= 0.0) || !std::isfinite(spec.noise_sd)) {
    throw InputError("noise_sd must be non-negative");
  }
  if (factor_form(spec)) return;
  const auto cov = signal_covariance(spec, owner);
  Eigen::Map<const Eigen::MatrixXd> m(cov.data(), spec.p, spec.p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  const double scale = m.cwiseAbs().maxCoeff();
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw InputError("block model covariance is not positive semidefinite");
  }
}

std::vector<double> population_covariance_matrix(const BlockModelSpec& spec) {
  validate(spec);
  auto cov = signal_covariance(spec, block_of(spec.p, spec.partition));
  for (std::size_t i = 0; i < spec.p; ++i) cov[i * spec.p + i] += spec.noise_sd * spec.noise_sd;
  return cov;
}

SimilarityState population_covariance(const BlockModelSpec& spec, Measure measure) {
  return SimilarityState(spec.p, population_covariance_matrix(spec), measure);
}

DataMatrix sample(const BlockModelSpec& spec, std::size_t n) {
  validate(spec);
  if (n < 2) throw InputError("sample size must be at least 2");
  const std::size_t p = spec.p;
  const auto owner = block_of(p, spec.partition);
  const std::size_t blocks = spec.partition.size();
  NormalStream normal(spec.seed);
  std::vector<double> values(n * p);

  if (factor_form(spec)) {
    // x_i = sd_i * (sqrt(a) g + sqrt(w - a) z_block + sqrt(1 - w) e_i) + noise
    const double global_w = std::sqrt(spec.across_corr);
    const double block_w = std::sqrt(spec.within_corr - spec.across_corr);
    const double own_w = std::sqrt(1.0 - spec.within_corr);
    std::vector<double> sd(p);
    for (std::size_t i = 0; i < p; ++i) sd[i] = std::sqrt(variance_of(spec, i));
    std::vector<double> z(blocks);
    for (std::size_t r = 0; r < n; ++r) {
      const double g = normal();
      for (auto& zb : z) zb = normal();
      for (std::size_t i = 0; i < p; ++i) {
        const double e = normal();
        const double eps = normal();
        const double signal = global_w * g + block_w * z[owner[i]] + own_w * e;
        values[r * p + i] = sd[i] * signal + spec.noise_sd * eps;
      }
    }
  } else {
    const auto cov = signal_covariance(spec, owner);
    Eigen::Map<const Eigen::MatrixXd> m(cov.data(), p, p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    const Eigen::MatrixXd factor =
        eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    Eigen::VectorXd z(p);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < p; ++i) z[i] = normal();
      const Eigen::VectorXd x = factor * z;
      for (std::size_t i = 0; i < p; ++i) values[r * p + i] = x[i] + spec.noise_sd * normal();
    }
  }
  return DataMatrix(n, p, std::move(values));
}

double recovery_score(const TreeletTree& tree, const Partition& partition) {
  const std::size_t p = tree.p;
  const auto owner = block_of(p, partition);
  std::vector<std::size_t> block_size(partition.size());
  for (std::size_t b = 0; b < partition.size(); ++b) block_size[b] = partition[b].size();

  // Leaves under each still-active slot.
  std::vector<std::vector<std::size_t>> members(p);
  for (std::size_t i = 0; i < p; ++i) members[i] = {i};

  auto complete_blocks_only = [&](const std::vector<std::size_t>& group) {
    std::map<std::size_t, std::size_t> count;
    for (std::size_t v : group) ++count[owner[v]];
    for (const auto& [b, c] : count)
      if (c != block_size[b]) return false;
    return true;
  };

  const std::size_t budget = std::min(tree.rotations.size(), p - partition.size());
  std::size_t within_in_budget = 0;
  bool connected = true;
  for (std::size_t k = 0; k < tree.rotations.size(); ++k) {
    const RotationRecord& r = tree.rotations[k];
    auto& a = members[r.sum_index];
    auto& b = members[r.detail_index];
    const std::size_t blk = owner[a.front()];
    const bool within =
        std::all_of(a.begin(), a.end(), [&](std::size_t v) { return owner[v] == blk; }) &&
        std::all_of(b.begin(), b.end(), [&](std::size_t v) { return owner[v] == blk; });
    if (k < budget && within) ++within_in_budget;
    if (!within && !(complete_blocks_only(a) && complete_blocks_only(b))) connected = false;
    a.insert(a.end(), b.begin(), b.end());
    b.clear();
  }
  if (connected) return 1.0;
  return budget == 0 ? 1.0 : static_cast<double>(within_in_budget) / static_cast<double>(budget);
}

RecoveryResult recovery_trials(const ExperimentTemplate& tmpl, std::size_t p, std::size_t n,
                               std::size_t trials) {
  if (trials == 0) throw InputError("trial count must be positive");
  BlockModelSpec spec;
  spec.p = p;
  spec.partition = equal_blocks(p, tmpl.block_size);
  spec.within_corr = tmpl.within_corr;
  spec.across_corr = tmpl.across_corr;
  spec.variances.assign(p, tmpl.variance);
  spec.noise_sd = tmpl.noise_sd;
  validate(spec);

  BuildOptions options;
  options.measure = tmpl.measure;
  std::vector<unsigned char> recovered(trials, 0);
  detail::parallel_for(trials, [&](std::size_t t) {
    BlockModelSpec local = spec;
    local.seed = derive_seed(tmpl.seed, p, t);
    const TreeletTree tree = build_tree(sample(local, n), options);
    recovered[t] = recovery_score(tree, local.partition) == 1.0 ? 1 : 0;
  });
  const auto hits = std::count(recovered.begin(), recovered.end(), 1);
  return {p, n, trials, static_cast<double>(hits) / static_cast<double>(trials)};
}

ExperimentResult min_sample_experiment(const std::vector<std::size_t>& p_list,
                                       const ExperimentTemplate& tmpl, double target,
                                       std::size_t trials) {
  if (!(target > 0.0 && target < 1.0)) throw InputError("target must lie in (0, 1)");
  if (tmpl.n_min < 2 || tmpl.n_max < tmpl.n_min) throw InputError("invalid sample-size range");
  ExperimentResult result;
  result.target = target;
  result.trials = trials;
  for (std::size_t p : p_list) {
    std::map<std::size_t, double> seen;
    auto fraction = [&](std::size_t n) {
      auto it = seen.find(n);
      if (it != seen.end()) return it->second;
      const double f = recovery_trials(tmpl, p, n, trials).recovered_fraction;
      seen.emplace(n, f);
      return f;
    };
    MinSampleRow row;
    row.p = p;
    std::size_t lo = tmpl.n_min;
    std::size_t hi = tmpl.n_max;
    if (fraction(hi) >= target) {
      if (fraction(lo) >= target) {
        hi = lo;
      } else {
        while (hi - lo > 1) {
          const std::size_t mid = lo + (hi - lo) / 2;
          (fraction(mid) >= target ? hi : lo) = mid;
        }
      }
      row.n_star = hi;
    }
    result.rows.push_back(row);
    for (const auto& [n, f] : seen) result.grid.push_back({p, n, trials, f});
  }
  return result;
}

std::optional<double> log_log_slope(const std::vector<MinSampleRow>& rows) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : rows) {
    if (!r.n_star) continue;
    xs.push_back(std::log(static_cast<double>(r.p)));
    ys.push_back(std::log(static_cast<double>(*r.n_star)));
  }
  if (xs.size() < 2) return std::nullopt;
  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

}  // namespace treelets
