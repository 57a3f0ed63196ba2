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

// Scenario configuration and its plain-text key/value file format
// (see docs/scenario-format.md).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "retouch/control.hpp"
#include "retouch/engine/intervention.hpp"
#include "retouch/model.hpp"

namespace retouch::engine {

inline constexpr double kControlDt = 1.0 / 500.0;

struct Waypoint {
  double t = 0.0;
  JointVec q;
};

/// Scripted operator: an impedance pulling the leader toward a minimum-jerk
/// interpolation of timed joint-space waypoints.
struct HandModel {
  std::vector<Waypoint> waypoints;
  double stiffness = 20.0;  // N m/rad
  double damping = 0.5;     // N m s/rad

  /// Interpolated target at time t (held before the first and after the
  /// last waypoint). Requires at least one waypoint.
  JointVec target(double t) const;
  /// Torque the hand applies to a robot at (q, dq).
  JointVec torque(double t, const JointVec& q, const JointVec& dq) const;
  void validate() const;
};

struct Scenario {
  model::PegTaskEnv env;
  model::RobotParams params;
  control::Gains gains;
  HandModel hand;
  InterventionProfile intervention;
  double duration = 24.0;
  double dt = kControlDt;
  /// Extra hold time after a replayed tape ends (copy runs).
  double copy_tail = 1.0;
  std::uint64_t seed = 0;
  bool realtime = false;
  /// Seeded angle quantization (0.001 rad with dither); off by default.
  bool sensor_noise = false;
  double noise_quantum = 0.001;

  /// Starting pose of every robot: the first hand waypoint.
  JointVec initial_pose() const;
  std::int64_t steps() const;
  void validate() const;
};

/// The shipped test-tube transfer scenario.
Scenario default_scenario();

Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical text form; parse_scenario(write) reproduces the scenario.
void write_scenario(const Scenario& s, std::ostream& out);

/// FNV-1a hash of the canonical text form.
std::uint64_t scenario_hash(const Scenario& s);

}  // namespace retouch::engine
