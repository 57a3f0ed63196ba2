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

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace retouch {

inline constexpr std::size_t kJoints = 8;

/// Eight-lane joint-space vector (angles, velocities, torques, inertias).
/// 32-byte aligned so the AVX2 kernels can use aligned loads.
struct alignas(32) JointVec {
  std::array<double, kJoints> v{};

  constexpr JointVec() = default;
  constexpr JointVec(double a1, double a2, double a3, double a4, double a5, double a6, double a7,
                     double a8)
      : v{a1, a2, a3, a4, a5, a6, a7, a8} {}

  static constexpr JointVec filled(double x) { return {x, x, x, x, x, x, x, x}; }
  static constexpr JointVec zero() { return {}; }
  /// Unit vector on a 0-based joint index.
  static constexpr JointVec unit(std::size_t joint, double x = 1.0) {
    JointVec r;
    r.v[joint] = x;
    return r;
  }

  constexpr double& operator[](std::size_t i) { return v[i]; }
  constexpr double operator[](std::size_t i) const { return v[i]; }

  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
  std::span<double, kJoints> span() { return v; }
  std::span<const double, kJoints> span() const { return v; }

  bool all_finite() const {
    for (double x : v) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }

  friend constexpr bool operator==(const JointVec&, const JointVec&) = default;
};

constexpr JointVec operator+(const JointVec& a, const JointVec& b) {
  JointVec r;
  for (std::size_t i = 0; i < kJoints; ++i) r.v[i] = a.v[i] + b.v[i];
  return r;
}

constexpr JointVec operator-(const JointVec& a, const JointVec& b) {
  JointVec r;
  for (std::size_t i = 0; i < kJoints; ++i) r.v[i] = a.v[i] - b.v[i];
  return r;
}

constexpr JointVec operator-(const JointVec& a) {
  JointVec r;
  for (std::size_t i = 0; i < kJoints; ++i) r.v[i] = -a.v[i];
  return r;
}

constexpr JointVec operator*(double s, const JointVec& a) {
  JointVec r;
  for (std::size_t i = 0; i < kJoints; ++i) r.v[i] = s * a.v[i];
  return r;
}

/// Lane-wise product.
constexpr JointVec hadamard(const JointVec& a, const JointVec& b) {
  JointVec r;
  for (std::size_t i = 0; i < kJoints; ++i) r.v[i] = a.v[i] * b.v[i];
  return r;
}

constexpr JointVec& operator+=(JointVec& a, const JointVec& b) { return a = a + b; }
constexpr JointVec& operator-=(JointVec& a, const JointVec& b) { return a = a - b; }

/// Throws std::domain_error naming `what` when any lane is NaN or infinite.
inline void require_finite(const JointVec& x, const char* what) {
  if (!x.all_finite()) throw std::domain_error(std::string(what) + ": non-finite joint value");
}

}  // namespace retouch
