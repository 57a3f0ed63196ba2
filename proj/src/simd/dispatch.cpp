// Copyright 2026 The retouch Authors
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
#include <cstdlib>
#include <string_view>

#include "retouch/simd/kernels.hpp"

namespace retouch::simd {
namespace {

const KernelTable* lookup(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return &scalar_kernels();
    case Backend::kAvx2:
      return avx2_kernels();
    case Backend::kNeon:
      return neon_kernels();
  }
  return nullptr;
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("RETOUCH_SIMD")) {
    const std::string_view want(env);
    const KernelTable* t = nullptr;
    if (want == "avx2") t = avx2_kernels();
    if (want == "neon") t = neon_kernels();
    return t ? t : &scalar_kernels();
  }
  if (const KernelTable* t = avx2_kernels()) return t;
  if (const KernelTable* t = neon_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& kernels() { return *active().load(std::memory_order_acquire); }

bool select_backend(Backend b) {
  const KernelTable* t = lookup(b);
  if (!t) return false;
  active().store(t, std::memory_order_release);
  return true;
}

}  // namespace retouch::simd
