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

#include "retouch/control.hpp"

#include "retouch/errors.hpp"
#include "retouch/simd/kernels.hpp"

namespace retouch::control {

void Gains::validate() const {
  if (!(kp >= 0.0) || !(kd >= 0.0) || !(kf >= 0.0)) throw ConfigError("gains must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
}

namespace {

JointVec pd_term(const JointVec& jn, const JointVec& pos_err, const JointVec& vel_err,
                 const Gains& g) {
  JointVec out;
  simd::kernels().pd(out.data(), jn.data(), pos_err.data(), vel_err.data(), g.kp, g.kd);
  return out;
}

JointVec blend(double alpha, const JointVec& toward, const JointVec& base) {
  return alpha * toward + (1.0 - alpha) * base;
}

ControlOutput compose(const JointVec& q_target, const JointVec& dq_target, const UnitState& self,
                      const Gains& g, const JointVec& common, const JointVec& comp) {
  ControlOutput o;
  o.q_target = q_target;
  o.dq_target = dq_target;
  o.diff_mode = pd_term(self.jn, q_target - self.q, dq_target - self.dq, g);
  o.common_mode = common;
  o.compensation = comp;
  o.tau_ref = (o.diff_mode + o.common_mode) + o.compensation;
  return o;
}

}  // namespace

JointVec position_pd(const CommandFrame& cmd, const JointVec& q, const JointVec& dq, const Gains& g,
                     const JointVec& jn) {
  return pd_term(jn, cmd.q_cmd - q, cmd.dq_cmd - dq, g);
}

JointVec force_p(const JointVec& tau_sum, double kf, int n_units) {
  if (n_units < 2) throw ConfigError("force_p: at least two units required");
  const double coef = kf / static_cast<double>(n_units);
  return (-coef) * tau_sum;
}

std::pair<ControlOutput, ControlOutput> retouch_step(const CommandFrame& leader,
                                                     const UnitState& follower,
                                                     const UnitState& editor, const Gains& g,
                                                     const JointVec& tau_dis_f,
                                                     const JointVec& tau_dis_e) {
  const JointVec common = force_p((leader.tau_cmd + follower.tau_res) + editor.tau_res, g.kf, 3);
  ControlOutput f = compose(blend(g.alpha, editor.q, leader.q_cmd),
                            blend(g.alpha, editor.dq, leader.dq_cmd), follower, g, common,
                            tau_dis_f);
  ControlOutput e = compose(blend(g.alpha, follower.q, leader.q_cmd),
                            blend(g.alpha, follower.dq, leader.dq_cmd), editor, g, common,
                            tau_dis_e);
  return {f, e};
}

std::pair<ControlOutput, ControlOutput> bilateral_4ch_step(const UnitState& leader,
                                                           const UnitState& follower,
                                                           const Gains& g,
                                                           const JointVec& tau_dis_l,
                                                           const JointVec& tau_dis_f) {
  const JointVec common = force_p(leader.tau_res + follower.tau_res, g.kf, 2);
  return {compose(follower.q, follower.dq, leader, g, common, tau_dis_l),
          compose(leader.q, leader.dq, follower, g, common, tau_dis_f)};
}

std::vector<std::optional<ControlOutput>> multilateral_step(
    const std::vector<MultilateralUnit>& units, const Gains& g) {
  const int n = static_cast<int>(units.size());
  if (n < 2) throw ConfigError("multilateral_step: at least two units required");

  JointVec tau_sum = units[0].state.tau_res;
  for (int i = 1; i < n; ++i) tau_sum = tau_sum + units[i].state.tau_res;
  const JointVec common = force_p(tau_sum, g.kf, n);

  std::vector<std::optional<ControlOutput>> out(units.size());
  for (int i = 0; i < n; ++i) {
    if (units[i].is_tape) continue;
    JointVec q_sum, dq_sum;
    bool first = true;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      q_sum = first ? units[j].state.q : q_sum + units[j].state.q;
      dq_sum = first ? units[j].state.dq : dq_sum + units[j].state.dq;
      first = false;
    }
    const double others = static_cast<double>(n - 1);
    JointVec q_mean, dq_mean;
    for (std::size_t k = 0; k < kJoints; ++k) {
      q_mean[k] = q_sum[k] / others;
      dq_mean[k] = dq_sum[k] / others;
    }
    out[i] = compose(q_mean, dq_mean, units[i].state, g, common, units[i].tau_dis);
  }
  return out;
}

ControlOutput motion_copy_step(const CommandFrame& tape_frame, const UnitState& follower,
                               const Gains& g, const JointVec& tau_dis_f) {
  const JointVec common = force_p(tape_frame.tau_cmd + follower.tau_res, g.kf, 2);
  return compose(tape_frame.q_cmd, tape_frame.dq_cmd, follower, g, common, tau_dis_f);
}

bool saturate(JointVec& tau, double limit) { return simd::kernels().saturate(tau.data(), limit); }

}  // namespace retouch::control
