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

// External torques a person applies to the editor robot during ReTouch,
// either scripted (windows) or recorded from a live session (ticks).
//
// File format (see docs/scenario-format.md):
//   # retouch-intervention v1
//   window = t0, t1, spring, k, b, q1..q8     ('-' leaves a joint free)
//   window = t0, t1, torque, tau1..tau8
//   tick = step, tau1..tau8                   (held until the next tick)
//   alpha = step, value                       (internal-division ratio from step on)

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "retouch/joint_vec.hpp"

namespace retouch::engine {

/// Live and scripted interventions are clipped to this per-joint magnitude.
inline constexpr double kInterventionLimit = 5.0;

struct InterventionWindow {
  enum class Kind { kSpring, kTorque };
  double t_start = 0.0;
  double t_end = 0.0;
  Kind kind = Kind::kTorque;
  /// kTorque: the constant torque. kSpring: the target pose.
  JointVec value;
  /// kSpring only: which lanes the spring acts on.
  std::array<bool, kJoints> active{};
  double stiffness = 0.0;  // N m/rad
  double damping = 0.0;    // N m s/rad
  friend bool operator==(const InterventionWindow&, const InterventionWindow&) = default;
};

struct InterventionTick {
  std::int64_t step = 0;
  JointVec torque;
  friend bool operator==(const InterventionTick&, const InterventionTick&) = default;
};

struct AlphaChange {
  std::int64_t step = 0;
  double alpha = 0.5;
  friend bool operator==(const AlphaChange&, const AlphaChange&) = default;
};

struct InterventionProfile {
  std::vector<InterventionWindow> windows;
  std::vector<InterventionTick> ticks;  // strictly increasing steps
  std::vector<AlphaChange> alpha_changes;  // strictly increasing steps

  bool empty() const { return windows.empty() && ticks.empty() && alpha_changes.empty(); }
  /// Windows must be non-overlapping, ordered and lie inside [0, duration];
  /// ticks must be strictly increasing. Throws ConfigError.
  void validate(double duration) const;

  /// Torque on the editor at (step, t) given its true state; clipped to
  /// +-kInterventionLimit.
  JointVec torque(std::int64_t step, double t, const JointVec& q, const JointVec& dq) const;

  /// Internal-division ratio in force at `step`; `base` before any change.
  double alpha(std::int64_t step, double base) const;

  /// First window covering t, if any.
  std::optional<InterventionWindow> window_at(double t) const;

  friend bool operator==(const InterventionProfile&, const InterventionProfile&) = default;
};

InterventionProfile parse_intervention(std::istream& in);
InterventionProfile load_intervention(const std::filesystem::path& path);
void write_intervention(const InterventionProfile& p, std::ostream& out);
void save_intervention(const InterventionProfile& p, const std::filesystem::path& path);

/// Parses the right-hand side of a `window = ...` line (shared with the
/// scenario format).
InterventionWindow parse_window(std::string_view rhs, std::size_t line);
InterventionTick parse_tick(std::string_view rhs, std::size_t line);
AlphaChange parse_alpha_change(std::string_view rhs, std::size_t line);
std::string format_window(const InterventionWindow& w);
std::string format_tick(const InterventionTick& t);

/// Clip each lane to +-kInterventionLimit.
JointVec clamp_intervention(const JointVec& tau);

}  // namespace retouch::engine
