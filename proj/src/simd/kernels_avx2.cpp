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

// AVX2 variants: one joint vector is two __m256d registers. Compiled with
// -mavx2 only (no -mfma) so products and sums round exactly like the
// scalar reference.

#include "retouch/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace retouch::simd {
namespace {

inline __m256d ld(const double* p) { return _mm256_loadu_pd(p); }
inline void st(double* p, __m256d v) { _mm256_storeu_pd(p, v); }

void lag(double* y, const double* x, const double* gain) {
  for (int h = 0; h < 8; h += 4) {
    const __m256d yv = ld(y + h);
    st(y + h, _mm256_add_pd(yv, _mm256_mul_pd(ld(gain + h), _mm256_sub_pd(ld(x + h), yv))));
  }
}

void pseudo_diff(double* y, double* out, const double* q, const double* fc, double dt) {
  const __m256d vdt = _mm256_set1_pd(dt);
  for (int h = 0; h < 8; h += 4) {
    const __m256d yv = ld(y + h);
    const __m256d d = _mm256_mul_pd(ld(fc + h), _mm256_sub_pd(ld(q + h), yv));
    st(out + h, d);
    st(y + h, _mm256_add_pd(yv, _mm256_mul_pd(vdt, d)));
  }
}

void observer(double* z, double* out, const double* u, const double* dq, const double* fcj,
              const double* gain) {
  for (int h = 0; h < 8; h += 4) {
    const __m256d m = _mm256_mul_pd(ld(fcj + h), ld(dq + h));
    const __m256d in = _mm256_add_pd(ld(u + h), m);
    const __m256d zv = ld(z + h);
    const __m256d zn = _mm256_add_pd(zv, _mm256_mul_pd(ld(gain + h), _mm256_sub_pd(in, zv)));
    st(z + h, zn);
    st(out + h, _mm256_sub_pd(zn, m));
  }
}

void pd(double* out, const double* jn, const double* pos_err, const double* vel_err, double kp,
        double kd) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d vkp = _mm256_set1_pd(kp);
  const __m256d vkd = _mm256_set1_pd(kd);
  for (int h = 0; h < 8; h += 4) {
    const __m256d pterm = _mm256_mul_pd(vkp, ld(pos_err + h));
    const __m256d dterm = _mm256_mul_pd(vkd, ld(vel_err + h));
    st(out + h, _mm256_mul_pd(_mm256_mul_pd(half, ld(jn + h)), _mm256_add_pd(pterm, dterm)));
  }
}

void semi_implicit_euler(double* q, double* dq, const double* tau_ref, const double* tau_res,
                         const double* d, const double* grav, const double* inertia, double dt) {
  const __m256d vdt = _mm256_set1_pd(dt);
  for (int h = 0; h < 8; h += 4) {
    const __m256d dqv = ld(dq + h);
    __m256d net = _mm256_sub_pd(ld(tau_ref + h), ld(tau_res + h));
    net = _mm256_sub_pd(net, _mm256_mul_pd(ld(d + h), dqv));
    net = _mm256_sub_pd(net, ld(grav + h));
    const __m256d acc = _mm256_div_pd(net, ld(inertia + h));
    const __m256d dqn = _mm256_add_pd(dqv, _mm256_mul_pd(vdt, acc));
    st(dq + h, dqn);
    st(q + h, _mm256_add_pd(ld(q + h), _mm256_mul_pd(vdt, dqn)));
  }
}

bool saturate(double* x, double limit) {
  const __m256d hi = _mm256_set1_pd(limit);
  const __m256d lo = _mm256_set1_pd(-limit);
  int mask = 0;
  for (int h = 0; h < 8; h += 4) {
    const __m256d xv = ld(x + h);
    mask |= _mm256_movemask_pd(_mm256_cmp_pd(xv, hi, _CMP_GT_OQ));
    mask |= _mm256_movemask_pd(_mm256_cmp_pd(xv, lo, _CMP_LT_OQ));
    // Operand order keeps NaN lanes untouched, as the scalar branch does.
    st(x + h, _mm256_min_pd(hi, _mm256_max_pd(lo, xv)));
  }
  return mask != 0;
}

constexpr KernelTable kTable{
    Backend::kAvx2, "avx2", lag, pseudo_diff, observer, pd, semi_implicit_euler, saturate,
};

}  // namespace

const KernelTable* avx2_kernels() {
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kTable : nullptr;
}

}  // namespace retouch::simd

#else

namespace retouch::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace retouch::simd

#endif
