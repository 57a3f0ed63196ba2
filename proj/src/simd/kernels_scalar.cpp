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

#include "retouch/joint_vec.hpp"
#include "retouch/simd/kernels.hpp"

namespace retouch::simd {
namespace {

constexpr std::size_t N = kJoints;

void lag(double* y, const double* x, const double* gain) {
  for (std::size_t i = 0; i < N; ++i) y[i] = y[i] + gain[i] * (x[i] - y[i]);
}

void pseudo_diff(double* y, double* out, const double* q, const double* fc, double dt) {
  for (std::size_t i = 0; i < N; ++i) {
    const double d = fc[i] * (q[i] - y[i]);
    out[i] = d;
    y[i] = y[i] + dt * d;
  }
}

void observer(double* z, double* out, const double* u, const double* dq, const double* fcj,
              const double* gain) {
  for (std::size_t i = 0; i < N; ++i) {
    const double m = fcj[i] * dq[i];
    const double in = u[i] + m;
    z[i] = z[i] + gain[i] * (in - z[i]);
    out[i] = z[i] - m;
  }
}

void pd(double* out, const double* jn, const double* pos_err, const double* vel_err, double kp,
        double kd) {
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = (0.5 * jn[i]) * (kp * pos_err[i] + kd * vel_err[i]);
  }
}

void semi_implicit_euler(double* q, double* dq, const double* tau_ref, const double* tau_res,
                         const double* d, const double* grav, const double* inertia, double dt) {
  for (std::size_t i = 0; i < N; ++i) {
    const double acc = (((tau_ref[i] - tau_res[i]) - d[i] * dq[i]) - grav[i]) / inertia[i];
    dq[i] = dq[i] + dt * acc;
    q[i] = q[i] + dt * dq[i];
  }
}

bool saturate(double* x, double limit) {
  bool clipped = false;
  for (std::size_t i = 0; i < N; ++i) {
    if (x[i] > limit) {
      x[i] = limit;
      clipped = true;
    } else if (x[i] < -limit) {
      x[i] = -limit;
      clipped = true;
    }
  }
  return clipped;
}

constexpr KernelTable kTable{
    Backend::kScalar, "scalar", lag, pseudo_diff, observer, pd, semi_implicit_euler, saturate,
};

}  // namespace

const KernelTable& scalar_kernels() { return kTable; }

}  // namespace retouch::simd
