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

#include "retouch/engine/robot.hpp"

#include <cmath>

namespace retouch::engine {

SimRobot::SimRobot(const model::RobotParams& params, const JointVec& q0, double dt,
                   SensorNoise noise)
    : params_(params), dt_(dt), noise_(noise), rng_(noise.seed), bank_(params.cutoff) {
  params_.validate();
  require_finite(q0, "SimRobot initial pose");
  state_.q = q0;
  bank_.reset(measure());
  // At rest the previous command is pure gravity compensation, so the
  // observers start in equilibrium.
  tau_applied_ = model::gravity_vector(q0, params_);
}

JointVec SimRobot::measure() {
  if (!noise_.enabled) return state_.q;
  std::uniform_real_distribution<double> dither(-0.5, 0.5);
  JointVec q;
  for (std::size_t i = 0; i < kJoints; ++i)
    q[i] = noise_.quantum * std::round(state_.q[i] / noise_.quantum + dither(rng_));
  return q;
}

Sensed SimRobot::sense() {
  Sensed s;
  s.unit.q = measure();
  s.unit.dq = bank_.pseudo_diff_update(s.unit.q, dt_);
  s.unit.jn = model::inertia_matrix(s.unit.q, params_);
  s.friction = model::friction_torque(s.unit.dq, params_);
  s.gravity = model::gravity_vector(s.unit.q, params_);
  s.unit.tau_res = bank_.rfob_update(tau_applied_, s.unit.dq, s.unit.jn, s.friction, s.gravity, dt_);
  s.tau_dis = bank_.dob_update(tau_applied_, s.unit.dq, s.unit.jn, s.friction + s.gravity, dt_);
  return s;
}

bool SimRobot::actuate(const JointVec& tau_ref, const JointVec& tau_env) {
  tau_applied_ = tau_ref;
  const bool clipped = control::saturate(tau_applied_);
  state_ = model::step_dynamics(state_, tau_applied_, tau_env, params_, dt_);
  return clipped;
}

}  // namespace retouch::engine
