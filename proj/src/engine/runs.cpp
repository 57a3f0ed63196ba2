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

#include "retouch/engine/runs.hpp"

#include <cmath>

#include "retouch/errors.hpp"

namespace retouch::engine {

namespace {

constexpr std::uint64_t kLeaderStream = 0x1eadull;
constexpr std::uint64_t kFollowerStream = 0xf011ull;
constexpr std::uint64_t kEditorStream = 0xed17ull;

SensorNoise noise_for(const Scenario& sc, std::uint64_t stream, int trial) {
  SensorNoise n;
  n.enabled = sc.sensor_noise;
  n.quantum = sc.noise_quantum;
  n.seed = sc.seed ^ (stream * 0x9e3779b97f4a7c15ull) ^ static_cast<std::uint64_t>(trial);
  return n;
}

RobotRecord record(const model::RobotState& before, const Sensed& s, const JointVec& tau_env,
                   const SimRobot& after, const control::ControlOutput& out, bool saturated) {
  RobotRecord r;
  r.q = before.q;
  r.dq = before.dq;
  r.dq_hat = s.unit.dq;
  r.tau_res_hat = s.unit.tau_res;
  r.tau_res_true = tau_env;
  r.tau_applied = after.tau_applied();
  r.out = out;
  r.saturated = saturated;
  return r;
}

RobotRecord tape_record(const control::CommandFrame& f) {
  RobotRecord r;
  r.q = f.q_cmd;
  r.dq = f.dq_cmd;
  r.dq_hat = f.dq_cmd;
  r.tau_res_hat = f.tau_cmd;
  return r;
}

void check_tape(const tape::Tape& tape, const Scenario& sc) {
  if (tape.empty()) throw ConfigError("tape is empty");
  if (std::abs(tape.meta.dt - sc.dt) > 1e-12 * sc.dt)
    throw ConfigError("tape dt " + tape::format_double(tape.meta.dt) +
                      " differs from the control period " + tape::format_double(sc.dt));
}

RunLog start_log(RunKind kind, const Scenario& sc, std::size_t reserve) {
  RunLog log;
  log.meta = {kind, scenario_hash(sc), sc.seed, sc.dt};
  log.steps.reserve(reserve);
  return log;
}

}  // namespace

TeachResult run_teach(const Scenario& sc) {
  sc.validate();
  const JointVec q0 = sc.initial_pose();
  SimRobot leader(sc.params, q0, sc.dt, noise_for(sc, kLeaderStream, 0));
  SimRobot follower(sc.params, q0, sc.dt, noise_for(sc, kFollowerStream, 0));
  model::TubeState tube = model::TubeState::initial(sc.env);

  TeachResult res;
  res.tape.meta.dt = sc.dt;
  res.tape.meta.source = "teach";
  const std::int64_t n = sc.steps();
  res.tape.samples.reserve(static_cast<std::size_t>(n));
  res.log = start_log(RunKind::kTeach, sc, static_cast<std::size_t>(n));

  for (std::int64_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * sc.dt;
    const model::RobotState lb = leader.state();
    const model::RobotState fb = follower.state();
    const Sensed sl = leader.sense();
    const Sensed sf = follower.sense();

    const JointVec hand = sc.hand.torque(t, lb.q, lb.dq);
    const JointVec env_l = -hand;
    const model::ContactResult contact = model::contact_torque(fb, sc.env, sc.params, tube);

    const auto [out_l, out_f] = control::bilateral_4ch_step(sl.unit, sf.unit, sc.gains, sl.tau_dis, sf.tau_dis);
    tape::append_sample(res.tape, {sl.unit.q, sl.unit.dq, sl.unit.tau_res}, t);

    const bool sat_l = leader.actuate(out_l.tau_ref, env_l);
    const bool sat_f = follower.actuate(out_f.tau_ref, contact.tau_res);
    tube = model::advance_tube(tube, follower.state(), contact.info, sc.env, sc.params);

    StepRecord rec;
    rec.step = k;
    rec.t = t;
    rec.leader = record(lb, sl, env_l, leader, out_l, sat_l);
    rec.follower = record(fb, sf, contact.tau_res, follower, out_f, sat_f);
    rec.contact = contact.info;
    rec.tube = tube;
    res.log.steps.push_back(std::move(rec));
  }
  res.report = evaluate_success(res.log, sc.env);
  return res;
}

CopyResult run_copy(const tape::Tape& tape, const Scenario& sc, int trial) {
  sc.validate();
  check_tape(tape, sc);
  SimRobot follower(sc.params, tape.samples.front().frame.q_cmd, sc.dt,
                    noise_for(sc, kFollowerStream, trial));
  model::TubeState tube = model::TubeState::initial(sc.env);

  const std::int64_t n =
      static_cast<std::int64_t>(tape.size()) + std::llround(sc.copy_tail / sc.dt);
  CopyResult res;
  res.log = start_log(RunKind::kCopy, sc, static_cast<std::size_t>(n));

  for (std::int64_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * sc.dt;
    const control::CommandFrame frame = tape::sample_at(tape, k).frame;
    const model::RobotState fb = follower.state();
    const Sensed sf = follower.sense();
    const model::ContactResult contact = model::contact_torque(fb, sc.env, sc.params, tube);

    const control::ControlOutput out = control::motion_copy_step(frame, sf.unit, sc.gains, sf.tau_dis);
    const bool sat = follower.actuate(out.tau_ref, contact.tau_res);
    tube = model::advance_tube(tube, follower.state(), contact.info, sc.env, sc.params);

    StepRecord rec;
    rec.step = k;
    rec.t = t;
    rec.leader = tape_record(frame);
    rec.follower = record(fb, sf, contact.tau_res, follower, out, sat);
    rec.contact = contact.info;
    rec.tube = tube;
    res.log.steps.push_back(std::move(rec));
  }
  res.report = evaluate_success(res.log, sc.env);
  return res;
}

RetouchLoop::RetouchLoop(const tape::Tape& tape, const Scenario& sc,
                         const InterventionProfile& profile)
    : tape_(tape),
      sc_(sc),
      timeline_(profile),
      total_(static_cast<std::int64_t>(tape.size())),
      follower_(sc.params, tape.empty() ? JointVec{} : tape.samples.front().frame.q_cmd, sc.dt,
                noise_for(sc, kFollowerStream, 0)),
      editor_(sc.params, tape.empty() ? JointVec{} : tape.samples.front().frame.q_cmd, sc.dt,
              noise_for(sc, kEditorStream, 0)),
      tube_(model::TubeState::initial(sc.env)) {
  sc_.validate();
  check_tape(tape, sc_);
  timeline_.validate(tape.meta.dt * static_cast<double>(tape.size()));
  out_tape_.meta = tape.meta;
  out_tape_.meta.source = "retouch";
  out_tape_.samples.reserve(tape.size());
  log_ = start_log(RunKind::kRetouch, sc_, tape.size());
  leader_frame_ = tape.samples.front().frame;
}

double RetouchLoop::alpha() const { return timeline_.alpha(step_, sc_.gains.alpha); }

void RetouchLoop::set_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  auto& changes = timeline_.alpha_changes;
  if (!changes.empty() && changes.back().step == step_) {
    changes.back().alpha = alpha;
  } else {
    changes.push_back({step_, alpha});
  }
}

void RetouchLoop::tick(const JointVec& live) {
  if (done()) throw ConfigError("retouch loop already finished");
  const JointVec clipped = clamp_intervention(live);
  if (!(clipped == live_)) {
    timeline_.ticks.push_back({step_, clipped});
    live_ = clipped;
  }

  const double t = static_cast<double>(step_) * sc_.dt;
  leader_frame_ = tape::sample_at(tape_, step_).frame;
  const model::RobotState fb = follower_.state();
  const model::RobotState eb = editor_.state();
  const Sensed sf = follower_.sense();
  const Sensed se = editor_.sense();

  const model::ContactResult contact = model::contact_torque(fb, sc_.env, sc_.params, tube_);
  intervention_ = timeline_.torque(step_, t, eb.q, eb.dq);
  const JointVec env_e = -intervention_;

  control::Gains g = sc_.gains;
  g.alpha = alpha();
  const auto [out_f, out_e] =
      control::retouch_step(leader_frame_, sf.unit, se.unit, g, sf.tau_dis, se.tau_dis);
  tape::append_sample(out_tape_, {out_f.q_target, out_f.dq_target, leader_frame_.tau_cmd + se.unit.tau_res}, t);

  const bool sat_f = follower_.actuate(out_f.tau_ref, contact.tau_res);
  const bool sat_e = editor_.actuate(out_e.tau_ref, env_e);
  tube_ = model::advance_tube(tube_, follower_.state(), contact.info, sc_.env, sc_.params);
  contact_ = contact.info;

  StepRecord rec;
  rec.step = step_;
  rec.t = t;
  rec.leader = tape_record(leader_frame_);
  rec.follower = record(fb, sf, contact.tau_res, follower_, out_f, sat_f);
  rec.editor = record(eb, se, env_e, editor_, out_e, sat_e);
  rec.contact = contact.info;
  rec.tube = tube_;
  rec.intervention = intervention_;
  log_.steps.push_back(std::move(rec));
  ++step_;
}

LoopSnapshot RetouchLoop::snapshot() const {
  LoopSnapshot s;
  s.step = step_;
  s.t = static_cast<double>(step_) * sc_.dt;
  s.alpha = alpha();
  s.leader = leader_frame_;
  s.follower = follower_.state();
  s.editor = editor_.state();
  s.follower_tau_res_hat = follower_.observers().tau_res_hat();
  s.editor_tau_res_hat = editor_.observers().tau_res_hat();
  s.intervention = intervention_;
  s.contact = contact_;
  s.tube = tube_;
  return s;
}

RetouchResult RetouchLoop::finish() && {
  RetouchResult r;
  r.report = evaluate_success(log_, sc_.env);
  r.tape = std::move(out_tape_);
  r.log = std::move(log_);
  r.timeline = std::move(timeline_);
  return r;
}

RetouchResult run_retouch(const tape::Tape& tape, const Scenario& sc,
                          const InterventionProfile& profile) {
  RetouchLoop loop(tape, sc, profile);
  while (!loop.done()) loop.tick();
  return std::move(loop).finish();
}

}  // namespace retouch::engine
