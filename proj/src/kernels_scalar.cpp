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

#include <cmath>

#include "kernels_impl.hpp"

namespace treelets::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void rotate_scalar(double* x, double* y, std::size_t n, double c, double s) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xv = x[i];
    const double yv = y[i];
    x[i] = c * xv + s * yv;
    y[i] = c * yv - s * xv;
  }
}

ArgMax abs_argmax_scalar(const double* row, const double* weight, const double* bias,
                         double row_weight, double cap, std::size_t begin, std::size_t end) {
  ArgMax best{end, -std::numeric_limits<double>::infinity()};
  for (std::size_t j = begin; j < end; ++j) {
    double v = std::fabs(row[j]) * (row_weight * weight[j]);
    v = v < cap ? v : cap;
    v = v + bias[j];
    if (v > best.value) best = {j, v};
  }
  return best;
}

}  // namespace

const Table& scalar_table() {
  static const Table table{Isa::scalar, "scalar", dot_scalar, axpy_scalar, rotate_scalar,
                           abs_argmax_scalar};
  return table;
}

}  // namespace treelets::kernels
