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

#include <gtest/gtest.h>

#include <cmath>

#include "retouch/control.hpp"
#include "retouch/errors.hpp"
#include "retouch/model.hpp"
#include "retouch/observers.hpp"

namespace {

using namespace retouch;
using observers::Lpf1State;
using observers::ObserverBank;

constexpr double kDt = 0.002;

TEST(Lag, FixedPoint) {
  Lpf1State st{0.7, 10.0};
  for (int i = 0; i < 100; ++i) {
    auto [n, y] = observers::lpf_update(st, 0.7, kDt);
    ASSERT_EQ(y, 0.7);
    st = n;
  }
}

TEST(Lag, StepResponseAtOneTimeConstant) {
  Lpf1State st{0.0, 10.0};
  double y = 0.0;
  for (int i = 0; i < 50; ++i) std::tie(st, y) = observers::lpf_update(st, 1.0, kDt);
  EXPECT_NEAR(y, 0.63212055882855768, 0.01 * 0.63212055882855768);
}

TEST(Lag, BoundedForBoundedInput) {
  for (double fc : {10.0, 15.0, 90.0}) {
    Lpf1State st{0.0, fc};
    double y = 0.0;
    for (int i = 0; i < 5000; ++i) {
      std::tie(st, y) = observers::lpf_update(st, (i / 7) % 2 ? 1.0 : -1.0, kDt);
      ASSERT_LE(std::abs(y), 1.0);
    }
  }
  EXPECT_THROW(observers::lpf_update({}, 1.0, 0.0), ConfigError);
}

TEST(PseudoDiff, ConstantAngleDecaysToZero) {
  const model::RobotParams p;
  ObserverBank bank(p.cutoff);
  const JointVec q = JointVec::filled(0.4);
  JointVec dq;
  for (int i = 0; i < 2000; ++i) dq = bank.pseudo_diff_update(q, kDt);
  for (double x : dq.v) EXPECT_NEAR(x, 0.0, 1e-9);
}

TEST(PseudoDiff, RampConvergesWithinOnePercentAfterFiveTimeConstants) {
  const model::RobotParams p;
  const double slope = 0.8;
  for (std::size_t j : {0u, 4u}) {
    ObserverBank bank(p.cutoff);
    const double fc = p.cutoff[j];
    const int n = static_cast<int>(std::ceil(5.0 / fc / kDt));
    JointVec dq;
    for (int i = 0; i <= n; ++i) dq = bank.pseudo_diff_update(JointVec::unit(j, slope * i * kDt), kDt);
    EXPECT_NEAR(dq[j], slope, 0.01 * slope) << "joint " << j + 1;
  }
  EXPECT_EQ(p.cutoff[0], 10.0);
  EXPECT_EQ(p.cutoff[4], 90.0);
}

/// One arm held at `q0` by PD + DOB compensation against a constant
/// environment torque. With `exact_velocity` the observers see the plant's
/// true velocity instead of the pseudo-differentiated one.
struct HoldLoop {
  model::RobotParams p;
  model::RobotState s;
  ObserverBank bank;
  JointVec tau_prev;
  JointVec tau_env;
  JointVec gravity_bias;
  bool use_dob = true;
  bool exact_velocity = true;
  control::Gains g;

  explicit HoldLoop(const JointVec& q0) : bank(p.cutoff) {
    s.q = q0;
    bank.reset(q0);
    tau_prev = model::gravity_vector(q0, p);
  }

  void step() {
    const JointVec dq_pd = bank.pseudo_diff_update(s.q, kDt);
    const JointVec dq_hat = exact_velocity ? s.dq : dq_pd;
    const JointVec jn = model::inertia_matrix(s.q, p);
    const JointVec fr = model::friction_torque(dq_hat, p);
    const JointVec gr = model::gravity_vector(s.q, p) + gravity_bias;
    bank.rfob_update(tau_prev, dq_hat, jn, fr, gr, kDt);
    const JointVec dis = bank.dob_update(tau_prev, dq_hat, jn, fr + gr, kDt);
    const control::CommandFrame hold{target, {}, {}};
    JointVec tau = control::position_pd(hold, s.q, dq_hat, g, jn);
    tau = tau + (use_dob ? dis : fr + gr);
    s = model::step_dynamics(s, tau, tau_env, p, kDt);
    tau_prev = tau;
  }
  void run(double seconds) {
    const int n = static_cast<int>(std::lround(seconds / kDt));
    for (int i = 0; i < n; ++i) step();
  }
  JointVec target;
};

const JointVec kPose{0.0, 0.3, 0.0, 1.2, 0.0, 0.0, 0.0, 0.2};

TEST(Dob, ZeroInputGivesZero) {
  ObserverBank bank(model::RobotParams{}.cutoff);
  const JointVec out = bank.dob_update({}, {}, JointVec::filled(0.01), {}, kDt);
  EXPECT_EQ(out, JointVec::zero());
}

TEST(Dob, ConstantDisturbanceEstimatedWithinTwoPercent) {
  HoldLoop h(kPose);
  h.target = kPose;
  const double d = 0.8;
  h.tau_env = JointVec::unit(3, d);
  h.run(5.0 / h.p.cutoff[3]);
  EXPECT_NEAR(h.bank.tau_obs_hat()[3], d, 0.02 * d);
}

TEST(Dob, RiseTimeScalesWithInverseCutoff) {
  auto rise_steps = [](double fc) {
    ObserverBank bank(JointVec::filled(fc));
    const JointVec jn = JointVec::filled(0.01);
    for (int i = 1; i < 100000; ++i) {
      const JointVec out = bank.dob_update(JointVec::filled(1.0), {}, jn, {}, kDt);
      if (out[0] >= 0.63212055882855768) return i;
    }
    return -1;
  };
  const double ratio = static_cast<double>(rise_steps(7.5)) / rise_steps(15.0);
  EXPECT_NEAR(ratio, 2.0, 0.1);
}

TEST(Dob, PositionResponseInvariantToConstantDisturbance) {
  const JointVec start = kPose;
  JointVec goal = kPose;
  goal[3] += 0.2;
  HoldLoop clean(start), loaded(start);
  clean.target = loaded.target = goal;
  loaded.tau_env = JointVec::unit(3, 1.0);
  clean.run(2.0);
  loaded.run(2.0);
  const double travel = goal[3] - start[3];
  EXPECT_NEAR(loaded.s.q[3], clean.s.q[3], 0.02 * travel);
}

TEST(Rfob, FreeMotionEstimateStaysNearZero) {
  HoldLoop h(kPose);
  double worst = 0.0;
  for (int i = 0; i < 1500; ++i) {
    h.target = kPose;
    h.target[3] = kPose[3] + 0.3 * std::sin(2.0 * i * kDt);
    h.step();
    for (double x : h.bank.tau_res_hat().v) worst = std::max(worst, std::abs(x));
  }
  EXPECT_LT(worst, 0.05);
}

TEST(Rfob, StaticContactEstimatedWithinOnePercent) {
  HoldLoop h(kPose);
  h.target = kPose;
  h.tau_env = JointVec::unit(3, 1.0);
  h.run(3.0);
  EXPECT_NEAR(h.bank.tau_res_hat()[3], 1.0, 0.01);
}

TEST(Rfob, GravityModelBiasPropagatesWithOppositeSign) {
  HoldLoop h(kPose);
  h.target = kPose;
  h.use_dob = false;
  h.gravity_bias = JointVec::unit(3, 0.1);
  h.run(3.0);
  EXPECT_NEAR(h.bank.tau_res_hat()[3], -0.1, 0.002);
}

TEST(Observers, Deterministic) {
  HoldLoop a(kPose), b(kPose);
  a.target = b.target = kPose;
  a.tau_env = b.tau_env = JointVec::unit(1, 0.3);
  a.run(1.0);
  b.run(1.0);
  EXPECT_EQ(a.bank.tau_res_hat(), b.bank.tau_res_hat());
  EXPECT_EQ(a.bank.tau_dis_hat(), b.bank.tau_dis_hat());
  EXPECT_EQ(a.s.q, b.s.q);
}

}  // namespace
