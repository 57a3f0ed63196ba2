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

// One simulated manipulator together with the controller-side signal chain:
// optional angle quantisation, pseudo-differentiation, DOB and RFOB.

#include <cstdint>
#include <random>

#include "retouch/control.hpp"
#include "retouch/model.hpp"
#include "retouch/observers.hpp"

namespace retouch::engine {

struct SensorNoise {
  bool enabled = false;
  double quantum = 0.001;  // rad
  std::uint64_t seed = 0;
};

/// What the controller sees after one sensing pass.
struct Sensed {
  control::UnitState unit;  // q_meas, dq_hat, tau_res_hat, Jn
  JointVec tau_dis;         // DOB output including friction + gravity
  JointVec friction;        // D * dq_hat
  JointVec gravity;         // g(q_meas)
};

class SimRobot {
 public:
  SimRobot(const model::RobotParams& params, const JointVec& q0, double dt,
           SensorNoise noise = {});

  /// Measures the plant and updates all observers with the torque applied
  /// during the previous step.
  Sensed sense();

  /// Saturates tau_ref, then integrates one step against the true
  /// environment torque. Returns true when saturation clipped a lane.
  bool actuate(const JointVec& tau_ref, const JointVec& tau_env);

  const model::RobotState& state() const { return state_; }
  const observers::ObserverBank& observers() const { return bank_; }
  const JointVec& tau_applied() const { return tau_applied_; }
  const model::RobotParams& params() const { return params_; }

 private:
  JointVec measure();

  model::RobotParams params_;
  double dt_;
  SensorNoise noise_;
  std::mt19937_64 rng_;
  model::RobotState state_;
  observers::ObserverBank bank_;
  JointVec tau_applied_;
};

}  // namespace retouch::engine
