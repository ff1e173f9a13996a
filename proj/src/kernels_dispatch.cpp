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

#include <atomic>

#include "kernels_impl.hpp"
#include "treelets/error.hpp"

namespace treelets::kernels {
namespace {

bool cpu_has_avx2() {
#if TREELETS_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Table* widest() {
  if (const Table* t = avx2()) return t;
  return &scalar();
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> table{widest()};
  return table;
}

}  // namespace

const Table& scalar() { return scalar_table(); }

const Table* avx2() {
#if TREELETS_HAVE_AVX2
  static const bool ok = cpu_has_avx2();
  return ok ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return avx2() != nullptr;
  }
  return false;
}

const Table& active() { return *current().load(std::memory_order_acquire); }

void select(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      current().store(&scalar(), std::memory_order_release);
      return;
    case Isa::avx2:
      if (const Table* t = avx2()) {
        current().store(t, std::memory_order_release);
        return;
      }
      throw ContractError("AVX2 kernels are not available on this machine");
  }
}

}  // namespace treelets::kernels
