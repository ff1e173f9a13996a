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

// Compiled with -mavx2 only. Nothing here may run before the dispatcher has
// confirmed AVX2 support.

#include <immintrin.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace treelets::kernels {
namespace {

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  acc0 = _mm256_add_pd(acc0, acc1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc0);
  double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_add_pd(yv, _mm256_mul_pd(a, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void rotate_avx2(double* x, double* y, std::size_t n, double c, double s) {
  const __m256d cv = _mm256_set1_pd(c);
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(x + i, _mm256_add_pd(_mm256_mul_pd(cv, xv), _mm256_mul_pd(sv, yv)));
    _mm256_storeu_pd(y + i, _mm256_sub_pd(_mm256_mul_pd(cv, yv), _mm256_mul_pd(sv, xv)));
  }
  for (; i < n; ++i) {
    const double xv = x[i];
    const double yv = y[i];
    x[i] = c * xv + s * yv;
    y[i] = c * yv - s * xv;
  }
}

ArgMax abs_argmax_avx2(const double* row, const double* weight, const double* bias,
                       double row_weight, double cap, std::size_t begin, std::size_t end) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  ArgMax best{end, neg_inf};
  std::size_t j = begin;
  if (end - begin >= 4) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    const __m256d rw = _mm256_set1_pd(row_weight);
    const __m256d capv = _mm256_set1_pd(cap);
    const __m256d four = _mm256_set1_pd(4.0);
    // Indices are carried as doubles; exact for any realistic p.
    __m256d idx = _mm256_setr_pd(double(j), double(j + 1), double(j + 2), double(j + 3));
    __m256d best_v = _mm256_set1_pd(neg_inf);
    __m256d best_i = idx;
    for (; j + 4 <= end; j += 4) {
      __m256d v = _mm256_andnot_pd(sign, _mm256_loadu_pd(row + j));
      v = _mm256_mul_pd(v, _mm256_mul_pd(rw, _mm256_loadu_pd(weight + j)));
      v = _mm256_min_pd(v, capv);
      v = _mm256_add_pd(v, _mm256_loadu_pd(bias + j));
      // Strict comparison keeps the earliest index within each lane.
      const __m256d gt = _mm256_cmp_pd(v, best_v, _CMP_GT_OQ);
      best_v = _mm256_blendv_pd(best_v, v, gt);
      best_i = _mm256_blendv_pd(best_i, idx, gt);
      idx = _mm256_add_pd(idx, four);
    }
    alignas(32) double vals[4];
    alignas(32) double inds[4];
    _mm256_store_pd(vals, best_v);
    _mm256_store_pd(inds, best_i);
    for (int lane = 0; lane < 4; ++lane) {
      const auto li = static_cast<std::size_t>(inds[lane]);
      if (vals[lane] > best.value || (vals[lane] == best.value && li < best.index)) {
        best = {li, vals[lane]};
      }
    }
  }
  for (; j < end; ++j) {
    double v = std::fabs(row[j]) * (row_weight * weight[j]);
    v = v < cap ? v : cap;
    v = v + bias[j];
    if (v > best.value) best = {j, v};
  }
  return best;
}

}  // namespace

const Table& avx2_table() {
  static const Table table{Isa::avx2, "avx2", dot_avx2, axpy_avx2, rotate_avx2, abs_argmax_avx2};
  return table;
}

}  // namespace treelets::kernels
