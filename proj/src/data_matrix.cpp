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

#include "treelets/data_matrix.hpp"

#include <cmath>

#include "treelets/error.hpp"

namespace treelets {

std::vector<std::string> default_names(std::size_t count, const std::string& prefix) {
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t i = 0; i < count; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                       std::vector<std::string> names)
    : rows_(rows), cols_(cols), values_(std::move(values)), names_(std::move(names)) {
  if (rows_ < 2 || cols_ < 2) {
    throw InputError("data matrix needs at least 2 observations and 2 variables, got " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  if (values_.size() != rows_ * cols_) {
    throw InputError("data matrix value count " + std::to_string(values_.size()) +
                     " does not match shape " + std::to_string(rows_) + "x" +
                     std::to_string(cols_));
  }
  if (names_.empty()) names_ = default_names(cols_);
  if (names_.size() != cols_) throw InputError("variable name count does not match column count");
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      if (!std::isfinite(values_[r * cols_ + c])) {
        throw InputError("non-finite value at row " + std::to_string(r) + ", column " +
                         std::to_string(c));
      }
    }
  }
}

DataMatrix DataMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<double> out;
  out.reserve(rows.size() * cols_);
  for (std::size_t r : rows) {
    if (r >= rows_) throw ContractError("row index " + std::to_string(r) + " out of range");
    auto src = row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  return DataMatrix(rows.size(), cols_, std::move(out), names_);
}

DataMatrix DataMatrix::transposed() const {
  std::vector<double> out(values_.size());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out[c * rows_ + r] = values_[r * cols_ + c];
  return DataMatrix(cols_, rows_, std::move(out), default_names(rows_, "r"));
}

std::vector<double> DataMatrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = values_[r * cols_ + j];
  return out;
}

}  // namespace treelets
