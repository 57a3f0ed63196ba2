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

#pragma once

// Eight-lane inner loops of the control cycle.
//
// Every kernel has a scalar reference implementation and, where the CPU
// supports it, an AVX2 (x86-64) or NEON (aarch64) variant. Variants are
// required to be bit-identical to the scalar reference: they use the same
// operation order, no fused multiply-add, and only IEEE-exact lane ops
// (add, sub, mul, div, min, max). The equivalence tests enforce this.
//
// All pointer arguments address exactly kJoints doubles. Pointers marked
// "inout" may alias nothing else.

#include <string_view>

namespace retouch::simd {

enum class Backend { kScalar, kAvx2, kNeon };

struct KernelTable {
  Backend backend;
  std::string_view name;

  // y <- y + gain * (x - y)
  void (*lag)(double* y, const double* x, const double* gain);

  // out = fc * (q - y);  y <- y + dt * out
  void (*pseudo_diff)(double* y, double* out, const double* q, const double* fc, double dt);

  // u' = u + fcj * dq;  z <- z + gain * (u' - z);  out = z - fcj * dq
  void (*observer)(double* z, double* out, const double* u, const double* dq, const double* fcj,
                   const double* gain);

  // out = (0.5 * jn) * (kp * pos_err + kd * vel_err)
  void (*pd)(double* out, const double* jn, const double* pos_err, const double* vel_err, double kp,
             double kd);

  // acc = (((tau_ref - tau_res) - d * dq) - grav) / inertia
  // dq <- dq + dt * acc;  q <- q + dt * dq
  void (*semi_implicit_euler)(double* q, double* dq, const double* tau_ref, const double* tau_res,
                              const double* d, const double* grav, const double* inertia,
                              double dt);

  // x <- min(max(x, -limit), limit); returns true when any lane was clipped
  bool (*saturate)(double* x, double limit);
};

const KernelTable& scalar_kernels();

/// Null when the binary or the running CPU lacks the instruction set.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

/// Kernel table chosen at first use: the widest supported backend, unless
/// RETOUCH_SIMD=scalar|avx2|neon overrides it (unsupported requests fall
/// back to scalar).
const KernelTable& kernels();

/// Forces a backend for the rest of the process; returns false when the
/// backend is unavailable (the active table is left unchanged).
bool select_backend(Backend b);

}  // namespace retouch::simd
