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

// Per-joint first-order filters and the observers built on them:
// pseudo-differentiation of measured angles, the velocity-based disturbance
// observer (DOB), and the reaction force observer (RFOB).
//
// Discretisation is forward Euler throughout, with gain a = cutoff * dt:
//   lag:          y' = y + a (x - y)
//   pseudo-diff:  dq_hat = fc (q - y);  y' = y + dt dq_hat
//   observers:    z' = z + a (u + fc Jn dq - z);  estimate = z' - fc Jn dq
// The pseudo-differentiator emits before advancing its state, which makes
// its ramp response converge to the exact slope.

#include <utility>

#include "retouch/joint_vec.hpp"

namespace retouch::observers {

struct Lpf1State {
  double y = 0.0;
  double cutoff = 1.0;  // rad/s
};

/// Returns the updated state and its output y'. Requires dt > 0.
std::pair<Lpf1State, double> lpf_update(Lpf1State st, double x, double dt);

class ObserverBank {
 public:
  ObserverBank() = default;
  /// `cutoff` is shared by all three filter channels of a joint.
  explicit ObserverBank(const JointVec& cutoff) : cutoff_(cutoff) {}

  /// Seeds the filters so a robot at rest at `q` reports zero velocity and
  /// the given steady torque estimates.
  void reset(const JointVec& q, const JointVec& dob_input = {}, const JointVec& rfob_input = {});

  /// dq_hat = fc (q - lpf(q)); see the header comment for the exact update.
  JointVec pseudo_diff_update(const JointVec& q_meas, double dt);

  /// Disturbance observer. `tau_ref` is the torque applied during the last
  /// step; `comp` the friction + gravity feed-forward. The filter input is
  /// tau_ref - comp, so only the residual (contact + model error) is
  /// low-passed; comp is added back unfiltered:
  ///   tau_dis_hat = lpf(tau_ref - comp + fc Jn dq) - fc Jn dq + comp
  JointVec dob_update(const JointVec& tau_ref, const JointVec& dq_meas, const JointVec& jn,
                      const JointVec& comp, double dt);

  /// Reaction force observer:
  ///   tau_res_hat = lpf(tau_ref + fc Jn dq - friction - gravity) - fc Jn dq
  JointVec rfob_update(const JointVec& tau_ref, const JointVec& dq_meas, const JointVec& jn,
                       const JointVec& friction_comp, const JointVec& gravity_comp, double dt);

  const JointVec& cutoff() const { return cutoff_; }
  const JointVec& dq_hat() const { return dq_hat_; }
  const JointVec& tau_dis_hat() const { return tau_dis_hat_; }
  /// DOB output before adding the compensation.
  const JointVec& tau_obs_hat() const { return tau_obs_hat_; }
  const JointVec& tau_res_hat() const { return tau_res_hat_; }

 private:
  JointVec cutoff_ = JointVec::filled(1.0);
  JointVec pd_state_;
  JointVec dob_state_;
  JointVec rfob_state_;
  JointVec dq_hat_;
  JointVec tau_obs_hat_;
  JointVec tau_dis_hat_;
  JointVec tau_res_hat_;
};

}  // namespace retouch::observers
