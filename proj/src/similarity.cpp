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

#include "treelets/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "treelets/error.hpp"
#include "treelets/kernels.hpp"
#include "treelets/tree.hpp"

namespace treelets {

namespace {

constexpr double kRetiredBias = -2.0;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string pair_text(std::size_t i, std::size_t j) {
  return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

}  // namespace

std::string_view to_string(Measure m) {
  return m == Measure::covariance ? "covariance" : "correlation";
}

Measure parse_measure(std::string_view text) {
  if (text == "covariance") return Measure::covariance;
  if (text == "correlation") return Measure::correlation;
  throw InputError("unknown similarity measure '" + std::string(text) +
                   "' (expected covariance or correlation)");
}

SimilarityState::SimilarityState(std::size_t p, std::vector<double> cov, Measure measure,
                                 std::vector<double> means)
    : p_(p),
      measure_(measure),
      cov_(std::move(cov)),
      means_(std::move(means)),
      active_(p, 1),
      active_count_(p),
      weight_(p, 1.0),
      mask_weight_(p, 1.0),
      bias_(p, 0.0),
      cap_(measure == Measure::correlation ? 1.0 : kernels::kNoCap) {
  if (p_ < 2) throw InputError("similarity state needs at least 2 variables");
  if (cov_.size() != p_ * p_) throw InputError("covariance matrix must be p x p");
  if (means_.empty()) means_.assign(p_, 0.0);
  if (means_.size() != p_) throw InputError("means vector must have length p");
  double scale = 0.0;
  for (double v : cov_) {
    if (!std::isfinite(v)) throw InputError("covariance matrix has a non-finite entry");
    scale = std::max(scale, std::abs(v));
  }
  for (std::size_t i = 0; i < p_; ++i) {
    if (cov_[i * p_ + i] < -1e-12 * scale) {
      throw InputError("covariance matrix has a negative variance at " + std::to_string(i));
    }
    cov_[i * p_ + i] = std::max(0.0, cov_[i * p_ + i]);
    for (std::size_t j = i + 1; j < p_; ++j) {
      double& upper = cov_[i * p_ + j];
      double& lower = cov_[j * p_ + i];
      if (std::abs(upper - lower) > 1e-12 * std::max(1.0, scale)) {
        throw InputError("covariance matrix is not symmetric at " + pair_text(i, j));
      }
      lower = upper;
    }
  }
  for (std::size_t i = 0; i < p_; ++i) refresh_weight(i);
}

void SimilarityState::refresh_weight(std::size_t i) {
  if (measure_ == Measure::correlation) {
    const double var = cov_[i * p_ + i];
    weight_[i] = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
  } else {
    weight_[i] = 1.0;
  }
  mask_weight_[i] = active_[i] ? weight_[i] : 0.0;
}

std::vector<std::size_t> SimilarityState::active_indices() const {
  std::vector<std::size_t> out;
  out.reserve(active_count_);
  for (std::size_t i = 0; i < p_; ++i)
    if (active_[i]) out.push_back(i);
  return out;
}

double SimilarityState::similarity(std::size_t i, std::size_t j) const {
  const double c = cov_[i * p_ + j];
  if (measure_ == Measure::covariance) return c;
  if (weight_[i] == 0.0 || weight_[j] == 0.0) return 0.0;
  // Direct quotient here; the pair search uses the weight product, which can
  // differ in the last bit.
  const double v = c / std::sqrt(cov_[i * p_ + i] * cov_[j * p_ + j]);
  return std::clamp(v, -1.0, 1.0);
}

void SimilarityState::apply(const RotationRecord& rot) {
  const std::size_t a = rot.alpha;
  const std::size_t b = rot.beta;
  if (a == b || !is_active(a) || !is_active(b)) {
    throw ContractError("rotation pair " + pair_text(a, b) + " is not an active pair");
  }
  if (!((rot.sum_index == a && rot.detail_index == b) ||
        (rot.sum_index == b && rot.detail_index == a))) {
    throw ContractError("rotation sum/detail indices do not match its pair");
  }
  const double c = std::cos(rot.theta);
  const double s = std::sin(rot.theta);
  const double caa = cov_[a * p_ + a];
  const double cbb = cov_[b * p_ + b];
  const double cab = cov_[a * p_ + b];
  const double new_aa = c * c * caa + 2.0 * c * s * cab + s * s * cbb;
  const double new_bb = s * s * caa - 2.0 * c * s * cab + c * c * cbb;
  const double new_ab = (c * c - s * s) * cab + c * s * (cbb - caa);
  const double tol = 1e-10 * (std::abs(caa) + std::abs(cbb));
  if (!(std::abs(new_ab) <= tol)) {
    throw InconsistentRotationError("rotation at level " + std::to_string(rot.level) +
                                    " leaves off-diagonal " + std::to_string(new_ab) +
                                    " on pair " + pair_text(a, b));
  }

  kernels::active().rotate(cov_.data() + a * p_, cov_.data() + b * p_, p_, c, s);
  cov_[a * p_ + a] = std::max(0.0, new_aa);
  cov_[b * p_ + b] = std::max(0.0, new_bb);
  cov_[a * p_ + b] = 0.0;
  cov_[b * p_ + a] = 0.0;
  for (std::size_t k = 0; k < p_; ++k) {
    if (k == a || k == b) continue;
    cov_[k * p_ + a] = cov_[a * p_ + k];
    cov_[k * p_ + b] = cov_[b * p_ + k];
  }

  const std::size_t d = rot.detail_index;
  active_[d] = 0;
  --active_count_;
  bias_[d] = kRetiredBias;
  refresh_weight(a);
  refresh_weight(b);
}

SimilarityState compute_state(const DataMatrix& x, Measure measure, Centering centering) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  std::vector<double> means(p, 0.0);
  std::vector<double> cols(n * p);
  for (std::size_t j = 0; j < p; ++j) {
    double* col = cols.data() + j * n;
    bool constant = true;
    for (std::size_t r = 0; r < n; ++r) {
      col[r] = x(r, j);
      constant = constant && col[r] == col[0];
    }
    if (centering == Centering::none) continue;
    if (constant) {
      // Exact zero residuals; a rounded mean would leave spurious variance.
      means[j] = col[0];
      std::fill(col, col + n, 0.0);
      continue;
    }
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += col[r];
    means[j] = sum / static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) col[r] -= means[j];
  }
  const auto& k = kernels::active();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> cov(p * p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      const double v = k.dot(cols.data() + i * n, cols.data() + j * n, n) * inv_n;
      cov[i * p + j] = v;
      cov[j * p + i] = v;
    }
  }
  return SimilarityState(p, std::move(cov), measure, std::move(means));
}

double similarity(const SimilarityState& state, std::size_t i, std::size_t j) {
  if (i == j) throw ContractError("similarity needs two distinct indices");
  if (!state.is_active(i) || !state.is_active(j)) {
    throw ContractError("similarity requested for inactive pair " + pair_text(i, j));
  }
  return state.similarity(i, j);
}

std::pair<std::size_t, std::size_t> max_similar_pair(const SimilarityState& state) {
  if (state.active_count() < 2) {
    throw ExhaustedTreeError("pair search needs at least 2 active variables");
  }
  const auto& k = kernels::active();
  const std::size_t p = state.size();
  std::pair<std::size_t, std::size_t> best{p, p};
  double best_value = kNegInf;
  for (std::size_t i = 0; i + 1 < p; ++i) {
    if (!state.is_active(i)) continue;
    const kernels::ArgMax r = k.abs_argmax(state.cov_row(i), state.weights(), state.biases(),
                                           state.row_weight(i), state.cap(), i + 1, p);
    if (r.value >= 0.0 && r.value > best_value) {
      best_value = r.value;
      best = {i, r.index};
    }
  }
  return best;
}

SimilarityState merge_update(SimilarityState state, const RotationRecord& rot) {
  state.apply(rot);
  return state;
}

PairCache::PairCache(const SimilarityState& state)
    : best_index_(state.size(), state.size()),
      best_value_(state.size(), kNegInf),
      live_(state.size(), 0) {
  for (std::size_t i = 0; i < state.size(); ++i) {
    live_[i] = state.is_active(i) ? 1 : 0;
    if (live_[i]) rescan(state, i);
  }
  rescans_ = 0;
}

void PairCache::rescan(const SimilarityState& state, std::size_t row) {
  ++rescans_;
  const std::size_t p = state.size();
  const kernels::ArgMax r =
      kernels::active().abs_argmax(state.cov_row(row), state.weights(), state.biases(),
                                   state.row_weight(row), state.cap(), row + 1, p);
  if (r.value >= 0.0) {
    best_index_[row] = r.index;
    best_value_[row] = r.value;
  } else {
    best_index_[row] = p;
    best_value_[row] = kNegInf;
  }
}

std::pair<std::size_t, std::size_t> PairCache::best() const {
  const std::size_t p = best_index_.size();
  std::pair<std::size_t, std::size_t> best{p, p};
  double best_value = kNegInf;
  for (std::size_t i = 0; i < p; ++i) {
    if (live_[i] && best_value_[i] > best_value) {
      best_value = best_value_[i];
      best = {i, best_index_[i]};
    }
  }
  if (best.first == p) throw ExhaustedTreeError("pair search needs at least 2 active variables");
  return best;
}

void PairCache::update(const SimilarityState& state, std::size_t sum_index,
                       std::size_t detail_index) {
  live_[detail_index] = 0;
  best_value_[detail_index] = kNegInf;
  for (std::size_t i = 0; i < live_.size(); ++i) {
    if (!live_[i]) continue;
    if (i == sum_index || best_index_[i] == sum_index || best_index_[i] == detail_index) {
      rescan(state, i);
    } else if (i < sum_index) {
      const double v = state.abs_similarity(i, sum_index);
      if (v > best_value_[i] || (v == best_value_[i] && sum_index < best_index_[i])) {
        best_value_[i] = v;
        best_index_[i] = sum_index;
      }
    }
  }
}

}  // namespace treelets
