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

// NEON variants for aarch64: one joint vector is four float64x2_t lanes.
// Built with -ffp-contract=off so vmulq/vaddq pairs are never fused.

#include "retouch/simd/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace retouch::simd {
namespace {

void lag(double* y, const double* x, const double* gain) {
  for (int h = 0; h < 8; h += 2) {
    const float64x2_t yv = vld1q_f64(y + h);
    vst1q_f64(y + h, vaddq_f64(yv, vmulq_f64(vld1q_f64(gain + h), vsubq_f64(vld1q_f64(x + h), yv))));
  }
}

void pseudo_diff(double* y, double* out, const double* q, const double* fc, double dt) {
  const float64x2_t vdt = vdupq_n_f64(dt);
  for (int h = 0; h < 8; h += 2) {
    const float64x2_t yv = vld1q_f64(y + h);
    const float64x2_t d = vmulq_f64(vld1q_f64(fc + h), vsubq_f64(vld1q_f64(q + h), yv));
    vst1q_f64(out + h, d);
    vst1q_f64(y + h, vaddq_f64(yv, vmulq_f64(vdt, d)));
  }
}

void observer(double* z, double* out, const double* u, const double* dq, const double* fcj,
              const double* gain) {
  for (int h = 0; h < 8; h += 2) {
    const float64x2_t m = vmulq_f64(vld1q_f64(fcj + h), vld1q_f64(dq + h));
    const float64x2_t in = vaddq_f64(vld1q_f64(u + h), m);
    const float64x2_t zv = vld1q_f64(z + h);
    const float64x2_t zn = vaddq_f64(zv, vmulq_f64(vld1q_f64(gain + h), vsubq_f64(in, zv)));
    vst1q_f64(z + h, zn);
    vst1q_f64(out + h, vsubq_f64(zn, m));
  }
}

void pd(double* out, const double* jn, const double* pos_err, const double* vel_err, double kp,
        double kd) {
  const float64x2_t half = vdupq_n_f64(0.5);
  const float64x2_t vkp = vdupq_n_f64(kp);
  const float64x2_t vkd = vdupq_n_f64(kd);
  for (int h = 0; h < 8; h += 2) {
    const float64x2_t pterm = vmulq_f64(vkp, vld1q_f64(pos_err + h));
    const float64x2_t dterm = vmulq_f64(vkd, vld1q_f64(vel_err + h));
    vst1q_f64(out + h, vmulq_f64(vmulq_f64(half, vld1q_f64(jn + h)), vaddq_f64(pterm, dterm)));
  }
}

void semi_implicit_euler(double* q, double* dq, const double* tau_ref, const double* tau_res,
                         const double* d, const double* grav, const double* inertia, double dt) {
  const float64x2_t vdt = vdupq_n_f64(dt);
  for (int h = 0; h < 8; h += 2) {
    const float64x2_t dqv = vld1q_f64(dq + h);
    float64x2_t net = vsubq_f64(vld1q_f64(tau_ref + h), vld1q_f64(tau_res + h));
    net = vsubq_f64(net, vmulq_f64(vld1q_f64(d + h), dqv));
    net = vsubq_f64(net, vld1q_f64(grav + h));
    const float64x2_t acc = vdivq_f64(net, vld1q_f64(inertia + h));
    const float64x2_t dqn = vaddq_f64(dqv, vmulq_f64(vdt, acc));
    vst1q_f64(dq + h, dqn);
    vst1q_f64(q + h, vaddq_f64(vld1q_f64(q + h), vmulq_f64(vdt, dqn)));
  }
}

bool saturate(double* x, double limit) {
  // vmaxq/vminq propagate NaN, matching the scalar branch that leaves NaN as is.
  const float64x2_t hi = vdupq_n_f64(limit);
  const float64x2_t lo = vdupq_n_f64(-limit);
  bool clipped = false;
  for (int h = 0; h < 8; h += 2) {
    const float64x2_t xv = vld1q_f64(x + h);
    const uint64x2_t over = vorrq_u64(vcgtq_f64(xv, hi), vcltq_f64(xv, lo));
    clipped |= (vgetq_lane_u64(over, 0) | vgetq_lane_u64(over, 1)) != 0;
    vst1q_f64(x + h, vminq_f64(hi, vmaxq_f64(lo, xv)));
  }
  return clipped;
}

constexpr KernelTable kTable{
    Backend::kNeon, "neon", lag, pseudo_diff, observer, pd, semi_implicit_euler, saturate,
};

}  // namespace

const KernelTable* neon_kernels() { return &kTable; }

}  // namespace retouch::simd

#else

namespace retouch::simd {
const KernelTable* neon_kernels() { return nullptr; }
}  // namespace retouch::simd

#endif
