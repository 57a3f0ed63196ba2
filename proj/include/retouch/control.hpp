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

// Acceleration-based position/force control laws.
//
// Every law has the shape
//   tau_ref = diff_mode + common_mode + compensation
// with diff_mode = (Jn/2)(Kp e + Kd de) toward a (possibly blended) position
// target, common_mode = -(Kf/N) * sum of reaction torques over the N units,
// and compensation = the unit's DOB output (friction + gravity + residual).
// The sum is always formed in that order, so the decomposition is exact.

#include <optional>
#include <utility>
#include <vector>

#include "retouch/joint_vec.hpp"

namespace retouch::control {

struct Gains {
  double kp = 256.0;   // 1/s^2
  double kd = 32.0;    // 1/s
  double kf = 0.7;
  double alpha = 0.5;  // internal-division ratio toward the editor

  /// Throws ConfigError unless kp, kd, kf >= 0 and 0 <= alpha <= 1.
  void validate() const;
};

struct CommandFrame {
  JointVec q_cmd;
  JointVec dq_cmd;
  JointVec tau_cmd;
  friend bool operator==(const CommandFrame&, const CommandFrame&) = default;
};

/// Response values of one physical unit as seen by the controller.
struct UnitState {
  JointVec q;        // measured angle
  JointVec dq;       // pseudo-differentiated velocity
  JointVec tau_res;  // RFOB estimate
  JointVec jn;       // nominal inertia at q
};

struct ControlOutput {
  JointVec tau_ref;
  JointVec diff_mode;
  JointVec common_mode;
  JointVec compensation;
  JointVec q_target;   // position target of the differential mode
  JointVec dq_target;  // velocity target of the differential mode
  friend bool operator==(const ControlOutput&, const ControlOutput&) = default;
};

/// (Jn/2)(kp (q_cmd - q) + kd (dq_cmd - dq)).
JointVec position_pd(const CommandFrame& cmd, const JointVec& q, const JointVec& dq, const Gains& g,
                     const JointVec& jn);

/// -(kf / n_units) * tau_sum. Throws ConfigError when n_units < 2.
JointVec force_p(const JointVec& tau_sum, double kf, int n_units);

/// Motion ReTouch: tape leader (outputs only), follower, editor. Returns
/// {follower, editor}. The follower tracks alpha*editor + (1-alpha)*leader,
/// the editor alpha*follower + (1-alpha)*leader; both share the three-unit
/// common mode over tau_l + tau_f + tau_e.
std::pair<ControlOutput, ControlOutput> retouch_step(const CommandFrame& leader,
                                                     const UnitState& follower,
                                                     const UnitState& editor, const Gains& g,
                                                     const JointVec& tau_dis_f,
                                                     const JointVec& tau_dis_e);

/// Four-channel bilateral control. Returns {leader, follower}.
std::pair<ControlOutput, ControlOutput> bilateral_4ch_step(const UnitState& leader,
                                                           const UnitState& follower,
                                                           const Gains& g,
                                                           const JointVec& tau_dis_l,
                                                           const JointVec& tau_dis_f);

struct MultilateralUnit {
  UnitState state;
  JointVec tau_dis;   // ignored for tape units
  bool is_tape = false;
};

/// N-unit multilateral control: each active unit tracks the mean position of
/// the others; one common mode over all N reaction torques. Tape-backed
/// units get std::nullopt. Throws ConfigError for fewer than 2 units.
std::vector<std::optional<ControlOutput>> multilateral_step(
    const std::vector<MultilateralUnit>& units, const Gains& g);

/// Motion copying: the follower replays a recorded command frame with the
/// two-unit force coefficient.
ControlOutput motion_copy_step(const CommandFrame& tape_frame, const UnitState& follower,
                               const Gains& g, const JointVec& tau_dis_f);

/// Per-joint torque limit applied before the plant input.
inline constexpr double kTorqueLimit = 10.0;

/// Clips every lane to [-limit, limit]; returns true when any lane was clipped.
bool saturate(JointVec& tau, double limit = kTorqueLimit);

}  // namespace retouch::control
