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
#include <string>
#include <vector>

namespace treelets {

/// n observations by p variables, row-major, with one label per variable.
///
/// Construction validates the shape (n >= 2, p >= 2) and rejects non-finite
/// cells with their coordinates.
class DataMatrix {
 public:
  DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
             std::vector<std::string> names = {});

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<const double> values() const { return values_; }
  const std::vector<std::string>& names() const { return names_; }

  /// New matrix holding the listed rows, in order.
  DataMatrix select_rows(std::span<const std::size_t> rows) const;
  /// Swaps observations and variables; variables of the result are named
  /// after the original rows ("r0", "r1", ...).
  DataMatrix transposed() const;

  /// Column j as a contiguous vector.
  std::vector<double> column(std::size_t j) const;

  friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  std::vector<std::string> names_;
};

std::vector<std::string> default_names(std::size_t count, const std::string& prefix = "x");

}  // namespace treelets
