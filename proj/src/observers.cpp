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

#include "retouch/observers.hpp"

#include "retouch/errors.hpp"
#include "retouch/simd/kernels.hpp"

namespace retouch::observers {

std::pair<Lpf1State, double> lpf_update(Lpf1State st, double x, double dt) {
  if (!(dt > 0.0)) throw ConfigError("lpf_update: dt must be > 0");
  st.y = st.y + (st.cutoff * dt) * (x - st.y);
  return {st, st.y};
}

void ObserverBank::reset(const JointVec& q, const JointVec& dob_input, const JointVec& rfob_input) {
  pd_state_ = q;
  dob_state_ = dob_input;
  rfob_state_ = rfob_input;
  dq_hat_ = {};
  tau_obs_hat_ = dob_input;
  tau_dis_hat_ = dob_input;
  tau_res_hat_ = rfob_input;
}

JointVec ObserverBank::pseudo_diff_update(const JointVec& q_meas, double dt) {
  if (!(dt > 0.0)) throw ConfigError("pseudo_diff_update: dt must be > 0");
  simd::kernels().pseudo_diff(pd_state_.data(), dq_hat_.data(), q_meas.data(), cutoff_.data(), dt);
  return dq_hat_;
}

JointVec ObserverBank::dob_update(const JointVec& tau_ref, const JointVec& dq_meas,
                                  const JointVec& jn, const JointVec& comp, double dt) {
  const JointVec gain = dt * cutoff_;
  const JointVec fcj = hadamard(cutoff_, jn);
  const JointVec u = tau_ref - comp;
  simd::kernels().observer(dob_state_.data(), tau_obs_hat_.data(), u.data(), dq_meas.data(),
                           fcj.data(), gain.data());
  tau_dis_hat_ = tau_obs_hat_ + comp;
  return tau_dis_hat_;
}

JointVec ObserverBank::rfob_update(const JointVec& tau_ref, const JointVec& dq_meas,
                                   const JointVec& jn, const JointVec& friction_comp,
                                   const JointVec& gravity_comp, double dt) {
  const JointVec gain = dt * cutoff_;
  const JointVec fcj = hadamard(cutoff_, jn);
  const JointVec u = (tau_ref - friction_comp) - gravity_comp;
  simd::kernels().observer(rfob_state_.data(), tau_res_hat_.data(), u.data(), dq_meas.data(),
                           fcj.data(), gain.data());
  return tau_res_hat_;
}

}  // namespace retouch::observers
