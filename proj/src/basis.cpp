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

#include "treelets/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "treelets/error.hpp"
#include "treelets/kernels.hpp"

namespace treelets {

namespace {

void check_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw InputError(std::string(what) + ": expected length " + std::to_string(want) + ", got " +
                     std::to_string(got));
  }
}

// Scatter s/d coefficients back into slot order.
std::vector<double> to_slots(const TreeletBasis& basis, const Coefficients& c) {
  check_length(c.s.size(), basis.scaling_columns().size(), "scaling coefficients");
  check_length(c.d.size(), basis.detail_columns().size(), "detail coefficients");
  std::vector<double> y(basis.size());
  for (std::size_t f = 0; f < c.s.size(); ++f) y[basis.scaling_columns()[f]] = c.s[f];
  for (std::size_t f = 0; f < c.d.size(); ++f) y[basis.detail_columns()[f]] = c.d[f];
  return y;
}

Coefficients from_slots(const TreeletBasis& basis, const std::vector<double>& y) {
  Coefficients c;
  c.s.reserve(basis.scaling_columns().size());
  c.d.reserve(basis.detail_columns().size());
  for (std::size_t k : basis.scaling_columns()) c.s.push_back(y[k]);
  for (std::size_t k : basis.detail_columns()) c.d.push_back(y[k]);
  return c;
}

}  // namespace

TreeletBasis basis_at_level(const TreeletTree& tree, std::size_t level) {
  if (level < 1 || level > tree.rotations.size()) {
    throw InputError("basis level must lie in [1, " + std::to_string(tree.rotations.size()) +
                     "], got " + std::to_string(level));
  }
  const std::size_t p = tree.p;
  TreeletBasis b;
  b.p_ = p;
  b.level_ = level;
  b.functions_.assign(p * p, 0.0);
  for (std::size_t k = 0; k < p; ++k) b.functions_[k * p + k] = 1.0;
  b.kinds_.assign(p, FunctionKind::scaling);
  b.origin_.assign(p, 0);
  b.rotations_.assign(tree.rotations.begin(), tree.rotations.begin() + level);

  const auto& kern = kernels::active();
  for (const RotationRecord& r : b.rotations_) {
    kern.rotate(b.functions_.data() + r.alpha * p, b.functions_.data() + r.beta * p, p,
                std::cos(r.theta), std::sin(r.theta));
    b.kinds_[r.detail_index] = FunctionKind::detail;
    b.origin_[r.detail_index] = r.level;
    b.detail_.push_back(r.detail_index);
  }
  for (std::size_t k = 0; k < p; ++k)
    if (b.kinds_[k] == FunctionKind::scaling) b.scaling_.push_back(k);

  b.signs_.assign(p, 1.0);
  for (std::size_t k = 0; k < p; ++k) {
    double* col = b.functions_.data() + k * p;
    std::size_t arg = 0;
    for (std::size_t i = 1; i < p; ++i)
      if (std::abs(col[i]) > std::abs(col[arg])) arg = i;
    if (col[arg] < 0.0) {
      b.signs_[k] = -1.0;
      for (std::size_t i = 0; i < p; ++i) col[i] = -col[i];
    }
  }
  return b;
}

Coefficients forward(const TreeletBasis& basis, std::span<const double> x) {
  check_length(x.size(), basis.size(), "forward transform input");
  const auto& kern = kernels::active();
  std::vector<double> y(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k)
    y[k] = kern.dot(basis.column(k).data(), x.data(), x.size());
  return from_slots(basis, y);
}

std::vector<double> inverse(const TreeletBasis& basis, const Coefficients& c) {
  const std::vector<double> y = to_slots(basis, c);
  const auto& kern = kernels::active();
  std::vector<double> x(basis.size(), 0.0);
  for (std::size_t k = 0; k < basis.size(); ++k)
    if (y[k] != 0.0) kern.axpy(y[k], basis.column(k).data(), x.data(), x.size());
  return x;
}

Coefficients forward_replay(const TreeletBasis& basis, std::span<const double> x) {
  check_length(x.size(), basis.size(), "forward transform input");
  std::vector<double> y(x.begin(), x.end());
  for (const RotationRecord& r : basis.rotations()) {
    const double c = std::cos(r.theta);
    const double s = std::sin(r.theta);
    const double ya = y[r.alpha];
    const double yb = y[r.beta];
    y[r.alpha] = c * ya + s * yb;
    y[r.beta] = c * yb - s * ya;
  }
  for (std::size_t k = 0; k < y.size(); ++k) y[k] *= basis.signs()[k];
  return from_slots(basis, y);
}

std::vector<double> inverse_replay(const TreeletBasis& basis, const Coefficients& c) {
  std::vector<double> y = to_slots(basis, c);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] *= basis.signs()[k];
  const auto& rots = basis.rotations();
  for (auto it = rots.rbegin(); it != rots.rend(); ++it) {
    const double cs = std::cos(it->theta);
    const double sn = std::sin(it->theta);
    const double ya = y[it->alpha];
    const double yb = y[it->beta];
    y[it->alpha] = cs * ya - sn * yb;
    y[it->beta] = sn * ya + cs * yb;
  }
  return y;
}

std::vector<double> coefficient_matrix(const TreeletBasis& basis, const DataMatrix& x) {
  check_length(x.cols(), basis.size(), "data matrix columns");
  const std::size_t p = basis.size();
  const auto& kern = kernels::active();
  std::vector<double> out(x.rows() * p);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double* row = x.row(r).data();
    for (std::size_t k = 0; k < p; ++k) out[r * p + k] = kern.dot(basis.column(k).data(), row, p);
  }
  return out;
}

std::vector<double> FeatureSet::project(std::span<const double> x) const {
  check_length(x.size(), p, "feature projection input");
  const auto& kern = kernels::active();
  std::vector<double> out(columns.size());
  for (std::size_t f = 0; f < columns.size(); ++f)
    out[f] = kern.dot(loadings.data() + f * p, x.data(), p);
  return out;
}

FeatureSet top_k_features(const TreeletBasis& basis, const DataMatrix& x, std::size_t k) {
  const std::size_t p = basis.size();
  if (k < 1 || k > p) {
    throw InputError("feature count K must lie in [1, " + std::to_string(p) + "], got " +
                     std::to_string(k));
  }
  const std::size_t n = x.rows();
  const std::vector<double> coef = coefficient_matrix(basis, x);

  std::vector<double> variance(p, 0.0);
  for (std::size_t c = 0; c < p; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += coef[r * p + c];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = coef[r * p + c] - mean;
      ss += d * d;
    }
    variance[c] = ss / static_cast<double>(n);
  }
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return variance[a] > variance[b]; });

  FeatureSet fs;
  fs.level = basis.level();
  fs.p = p;
  fs.rows = n;
  fs.columns.assign(order.begin(), order.begin() + k);
  fs.loadings.resize(k * p);
  fs.coefficients.resize(n * k);
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t col = fs.columns[f];
    fs.kinds.push_back(basis.kind(col));
    fs.origin_levels.push_back(basis.origin_level(col));
    fs.variances.push_back(variance[col]);
    std::copy_n(basis.column(col).data(), p, fs.loadings.data() + f * p);
    for (std::size_t r = 0; r < n; ++r) fs.coefficients[r * k + f] = coef[r * p + col];
  }
  return fs;
}

FeatureSet top_k_features(const TreeletTree& tree, const DataMatrix& x, std::size_t level,
                          std::size_t k) {
  return top_k_features(basis_at_level(tree, level), x, k);
}

}  // namespace treelets
