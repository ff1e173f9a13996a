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

// Inner loops of the transform, as a table of function pointers.
//
// Every table implements the same contracts. `rotate`, `axpy` and
// `abs_argmax` are bit-exact across implementations (elementwise IEEE
// operations in the same order, no fused multiply-add); `dot` may differ in
// the last bits because the reduction order differs.

#include <cstddef>
#include <limits>
#include <string_view>

namespace treelets::kernels {

enum class Isa { scalar, avx2 };

struct ArgMax {
  std::size_t index;
  double value;
};

struct Table {
  Isa isa;
  std::string_view name;

  /// sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);

  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  /// Givens rotation of two rows in place:
  ///   x' = c*x + s*y,  y' = c*y - s*x
  void (*rotate)(double* x, double* y, std::size_t n, double c, double s);

  /// First index in [begin, end) maximizing
  ///   v[j] = min(|row[j]| * (row_weight * weight[j]), cap) + bias[j].
  /// Returns {end, -inf} on an empty range.
  ArgMax (*abs_argmax)(const double* row, const double* weight, const double* bias,
                       double row_weight, double cap, std::size_t begin, std::size_t end);
};

const Table& scalar();

/// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const Table* avx2();

bool supported(Isa isa);

/// Table used by the library. Defaults to the widest supported ISA.
const Table& active();

/// Override the active table (tests and benchmarks). Throws ContractError when
/// the ISA is unavailable.
void select(Isa isa);

inline constexpr double kNoCap = std::numeric_limits<double>::infinity();

}  // namespace treelets::kernels
