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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <future>
#include <random>
#include <string>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "json.hpp"
#include "retouch/control.hpp"
#include "retouch/engine/runs.hpp"
#include "retouch/engine/session.hpp"
#include "retouch/model.hpp"
#include "retouch/observers.hpp"
#include "retouch/tape.hpp"

namespace {

using namespace retouch;
using namespace retouch::engine;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const fs::path kScenarios = RETOUCH_SCENARIOS;
const fs::path kData = RETOUCH_TEST_DATA;
constexpr std::size_t kTrials = 10;
constexpr std::size_t kInsertionLane = 3;  // joint 4

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

/// Runs shared by criteria 1, 2 and 7.
struct Pipeline {
  Scenario sc;
  InterventionProfile fix;
  TeachResult teach;
  tape::Tape fast;
  RetouchResult retouched;
  std::vector<CopyResult> copies_1x, copies_3x, copies_fixed;
  double seconds = 0.0;
};

Pipeline run_pipeline() {
  const auto start = Clock::now();
  Pipeline p;
  p.sc = load_scenario(kScenarios / "tube.scn");
  p.fix = load_intervention(kScenarios / "tube_x3_fix.int");
  p.teach = run_teach(p.sc);
  for (std::size_t i = 0; i < kTrials; ++i) p.copies_1x.push_back(run_copy(p.teach.tape, p.sc, int(i)));
  p.fast = tape::speed_up(p.teach.tape, 3);
  for (std::size_t i = 0; i < kTrials; ++i) p.copies_3x.push_back(run_copy(p.fast, p.sc, int(i)));
  p.retouched = run_retouch(p.fast, p.sc, p.fix);
  for (std::size_t i = 0; i < kTrials; ++i) p.copies_fixed.push_back(run_copy(p.retouched.tape, p.sc, int(i)));
  p.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return p;
}

std::size_t successes(const std::vector<CopyResult>& runs) {
  return static_cast<std::size_t>(
      std::count_if(runs.begin(), runs.end(), [](const CopyResult& r) { return r.report.success; }));
}

void criterion1(const Pipeline& p) {
  const std::size_t a = successes(p.copies_1x), b = successes(p.copies_3x), c = successes(p.copies_fixed);
  const bool pass = a == kTrials && b == 0 && c >= 9 && p.seconds < 60.0;
  report(1, pass,
         fmt("copy x1 %zu/%zu, copy x3 %zu/%zu (%s), retouched x3 %zu/%zu, %.1f s", a, kTrials, b, kTrials,
             to_string(p.copies_3x.front().report.reason), c, kTrials, p.seconds));
}

double worst_rms(const RunLog& a, const RunLog& b, std::size_t n, std::size_t* worst_joint) {
  double worst = 0.0;
  for (std::size_t j = 0; j < kJoints; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = a.steps[i].follower->q[j] - b.steps[i].follower->q[j];
      s += d * d;
    }
    const double rms = std::sqrt(s / static_cast<double>(n));
    if (rms > worst) {
      worst = rms;
      *worst_joint = j + 1;
    }
  }
  return worst;
}

void criterion2(const Pipeline& p) {
  const RetouchResult neutral = run_retouch(p.teach.tape, p.sc, {});
  std::size_t joint = 0, joint3 = 0;
  const double rms = worst_rms(neutral.log, p.copies_1x.front().log, neutral.log.steps.size(), &joint);
  const RetouchResult neutral3 = run_retouch(p.fast, p.sc, {});
  const double rms3 = worst_rms(neutral3.log, p.copies_3x.front().log, neutral3.log.steps.size(), &joint3);
  report(2, rms < 0.01,
         fmt("max per-joint RMS %.5f rad (joint %zu) on the taught tape; x3 tape for reference %.5f (joint %zu)",
             rms, joint, rms3, joint3));
}

void criterion3() {
  const Scenario sc = default_scenario();
  const JointVec q0 = sc.initial_pose();
  SimRobot leader(sc.params, q0, sc.dt), follower(sc.params, q0, sc.dt);
  JointVec wall = q0 + JointVec::filled(0.03);
  const JointVec pull = q0 + JointVec::filled(0.1);
  const double k_hand = 20.0, b_hand = 0.5, k_wall = 50.0, b_wall = 1.0;
  double worst = 0.0;
  std::size_t worst_joint = 0;
  const int n = static_cast<int>(std::lround(3.0 / sc.dt));
  for (int i = 0; i < n; ++i) {
    const model::RobotState ls = leader.state(), fs = follower.state();
    const Sensed sl = leader.sense(), sf = follower.sense();
    JointVec env_l, env_f;
    for (std::size_t j = 0; j < kJoints; ++j) {
      env_l[j] = -(k_hand * (pull[j] - ls.q[j]) - b_hand * ls.dq[j]);
      if (fs.q[j] > wall[j]) env_f[j] = k_wall * (fs.q[j] - wall[j]) + b_wall * fs.dq[j];
    }
    const auto [ol, of] = control::bilateral_4ch_step(sl.unit, sf.unit, sc.gains, sl.tau_dis, sf.tau_dis);
    leader.actuate(ol.tau_ref, env_l);
    follower.actuate(of.tau_ref, env_f);
    if (i * sc.dt >= 1.0) {
      for (std::size_t j = 0; j < kJoints; ++j) {
        const double sum = std::abs(sl.unit.tau_res[j] + sf.unit.tau_res[j]);
        if (sum > worst) {
          worst = sum;
          worst_joint = j + 1;
        }
      }
    }
  }
  report(3, worst < 0.05, fmt("max |tau_l + tau_f| after 1 s: %.5f N m (joint %zu)", worst, worst_joint));
}

void criterion4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-2.0, 2.0), jn(0.002, 0.1);
  auto vec = [&](auto& dist) {
    JointVec v;
    for (double& x : v.v) x = dist(rng);
    return v;
  };
  auto unit = [&] { return control::UnitState{vec(d), vec(d), vec(d), vec(jn)}; };
  std::size_t blend_mismatch = 0, multi_mismatch = 0;
  const double alphas[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int i = 0; i < 10000; ++i) {
    control::Gains g;
    g.alpha = alphas[i % 5];
    const control::CommandFrame l{vec(d), vec(d), vec(d)};
    const control::UnitState f = unit(), e = unit();
    const auto [of, oe] = control::retouch_step(l, f, e, g, vec(d), vec(d));
    for (std::size_t k = 0; k < kJoints; ++k) {
      if (of.q_target[k] != g.alpha * e.q[k] + (1.0 - g.alpha) * l.q_cmd[k]) ++blend_mismatch;
    }
    const JointVec df = vec(d), de = vec(d);
    const control::UnitState tape_unit{l.q_cmd, l.dq_cmd, l.tau_cmd, f.jn};
    const auto m = control::multilateral_step({{tape_unit, {}, true}, {f, df, false}, {e, de, false}},
                                              control::Gains{});
    const auto [rf, re] = control::retouch_step(l, f, e, control::Gains{}, df, de);
    if (!(*m[1] == rf) || !(*m[2] == re)) ++multi_mismatch;
  }
  report(4, blend_mismatch == 0 && multi_mismatch == 0,
         fmt("10000 inputs: %zu blend mismatches, %zu multilateral mismatches", blend_mismatch, multi_mismatch));
}

/// One arm held in place by PD plus DOB compensation against a constant
/// environment torque; the observers see the plant's true velocity.
struct Hold {
  model::RobotParams p;
  model::RobotState s;
  observers::ObserverBank bank;
  JointVec tau_prev, tau_env, target;
  control::Gains g;
  double dt = 0.002;

  explicit Hold(const JointVec& q0) : bank(p.cutoff), target(q0) {
    s.q = q0;
    bank.reset(q0);
    tau_prev = model::gravity_vector(q0, p);
  }
  void run(double seconds) {
    for (long i = 0, n = std::lround(seconds / dt); i < n; ++i) {
      const JointVec dq_hat = s.dq;
      const JointVec jn = model::inertia_matrix(s.q, p);
      const JointVec fr = model::friction_torque(dq_hat, p);
      const JointVec gr = model::gravity_vector(s.q, p);
      bank.rfob_update(tau_prev, dq_hat, jn, fr, gr, dt);
      const JointVec dis = bank.dob_update(tau_prev, dq_hat, jn, fr + gr, dt);
      const JointVec tau = control::position_pd({target, {}, {}}, s.q, dq_hat, g, jn) + dis;
      s = model::step_dynamics(s, tau, tau_env, p, dt);
      tau_prev = tau;
    }
  }
};

void criterion5() {
  const JointVec pose{0.0, 0.3, 0.0, 1.2, 0.0, 0.0, 0.0, 0.2};
  double dob_err = 0.0, rfob_err = 0.0, ramp_err = 0.0;
  for (std::size_t j = 0; j < kJoints; ++j) {
    const double d = 0.8;
    Hold h(pose);
    h.tau_env = JointVec::unit(j, d);
    h.run(5.0 / h.p.cutoff[j]);
    dob_err = std::max(dob_err, std::abs(h.bank.tau_obs_hat()[j] - d) / d);

    Hold c(pose);
    c.tau_env = JointVec::unit(j, d);
    c.run(3.0);
    rfob_err = std::max(rfob_err, std::abs(c.bank.tau_res_hat()[j] - c.tau_env[j]) / d);

    observers::ObserverBank bank(h.p.cutoff);
    const double slope = 0.8, dt = 0.002;
    const long n = std::lround(std::ceil(5.0 / h.p.cutoff[j] / dt));
    JointVec dq;
    for (long i = 0; i <= n; ++i) dq = bank.pseudo_diff_update(JointVec::unit(j, slope * i * dt), dt);
    ramp_err = std::max(ramp_err, std::abs(dq[j] - slope) / slope);
  }
  report(5, dob_err < 0.02 && rfob_err < 0.02 && ramp_err < 0.01,
         fmt("worst relative error over 8 joints: DOB %.4f, RFOB %.4f, pseudo-diff ramp %.4f", dob_err, rfob_err,
             ramp_err));
}

bool same_bits(const JointVec& a, const JointVec& b) {
  for (std::size_t j = 0; j < kJoints; ++j)
    if (std::bit_cast<std::uint64_t>(a[j]) != std::bit_cast<std::uint64_t>(b[j])) return false;
  return true;
}

void criterion6(const Pipeline& p) {
  bool ok = true;
  const tape::Tape in = tape::load_tape(kData / "speedup_in.csv");
  const tape::Tape golden = tape::load_tape(kData / "speedup_x3.csv");
  const tape::Tape out = tape::speed_up(in, 3);
  ok = ok && out.size() == golden.size();
  for (std::size_t i = 0; ok && i < out.size(); ++i) {
    const auto& a = out.samples[i];
    const auto& b = golden.samples[i];
    ok = a.step == b.step && a.t == b.t && same_bits(a.frame.q_cmd, b.frame.q_cmd) &&
         same_bits(a.frame.dq_cmd, b.frame.dq_cmd) && same_bits(a.frame.tau_cmd, b.frame.tau_cmd);
  }
  const bool golden_ok = ok;

  // The taught tape: every third sample, q and tau untouched, dq tripled bitwise.
  for (std::size_t i = 0; ok && i < p.fast.size(); ++i) {
    const auto& src = p.teach.tape.samples[3 * i].frame;
    const auto& dst = p.fast.samples[i].frame;
    ok = same_bits(dst.q_cmd, src.q_cmd) && same_bits(dst.tau_cmd, src.tau_cmd) &&
         same_bits(dst.dq_cmd, 3.0 * src.dq_cmd);
  }

  tape::Tape closed = p.teach.tape;
  tape::append_sample(closed, closed.samples.back().frame, 24.0);
  const tape::Tape closed3 = tape::speed_up(closed, 3);
  const bool rows = closed.size() == 12001 && closed3.size() == 4001 && closed.samples.back().t == 24.0 &&
                    closed3.samples.back().t == 8.0 && p.teach.tape.duration() == 24.0 &&
                    p.fast.duration() == 8.0;
  report(6, ok && rows,
         fmt("golden file %s; taught tape %zu -> %zu samples (%.0f s -> %.0f s); 12001 -> %zu rows, last t %.3f",
             golden_ok ? "matches" : "differs", p.teach.tape.size(), p.fast.size(), p.teach.tape.duration(),
             p.fast.duration(), closed3.size(), closed3.samples.back().t));
}

double variance(const RunLog& log, double t0, double t1, std::size_t lane) {
  double s = 0.0, s2 = 0.0;
  int n = 0;
  for (const StepRecord& r : log.steps) {
    if (r.t < t0 || r.t >= t1) continue;
    const double x = r.follower->tau_res_hat[lane];
    s += x;
    s2 += x * x;
    ++n;
  }
  const double m = s / n;
  return s2 / n - m * m;
}

double window_rms(const RunLog& a, const RunLog& b, double t0, double t1, std::size_t* worst_joint) {
  double worst = 0.0;
  for (std::size_t j = 0; j < kJoints; ++j) {
    double s = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < std::min(a.steps.size(), b.steps.size()); ++i) {
      if (a.steps[i].t < t0 || a.steps[i].t >= t1) continue;
      const double d = a.steps[i].follower->q[j] - b.steps[i].follower->q[j];
      s += d * d;
      ++n;
    }
    const double rms = std::sqrt(s / n);
    if (rms > worst) {
      worst = rms;
      *worst_joint = j + 1;
    }
  }
  return worst;
}

void criterion7(const Pipeline& p) {
  const InterventionWindow& w = p.fix.windows.front();
  const double v3 = variance(p.copies_3x.front().log, w.t_start, w.t_end, kInsertionLane);
  const double vr = variance(p.copies_fixed.front().log, w.t_start, w.t_end, kInsertionLane);
  std::size_t joint = 0;
  const double rms = window_rms(p.copies_fixed.front().log, p.copies_3x.front().log, w.t_start, w.t_end, &joint);
  const double ratio = vr / v3;
  report(7, ratio < 0.5 && rms < 0.05,
         fmt("joint 4 tau_res_hat variance in [%.2f, %.2f) s: %.5f vs %.5f, ratio %.3f; position RMS change %.4f "
             "rad (joint %zu)",
             w.t_start, w.t_end, vr, v3, ratio, rms, joint));
}

/// Drives a live session: a few torque pushes and an alpha change, then quit.
RetouchResult live_session(const tape::Tape& tp, const Scenario& sc, const InterventionProfile& scripted) {
  namespace net = boost::asio;
  namespace websocket = boost::beast::websocket;
  using json = nlohmann::json;
  SessionOptions opt;
  opt.port = 0;
  opt.realtime = false;
  opt.start_paused = true;
  Session session(tp, sc, scripted, opt);
  auto result = std::async(std::launch::async, [&] { return session.run(); });

  net::io_context ioc;
  websocket::stream<net::ip::tcp::socket> ws(ioc);
  net::ip::tcp::resolver resolver(ioc);
  net::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(session.port())));
  ws.handshake("127.0.0.1", "/");
  auto read = [&] {
    boost::beast::flat_buffer buf;
    ws.read(buf);
    return json::parse(boost::beast::buffers_to_string(buf.data()));
  };
  auto send = [&](const json& j) { ws.write(net::buffer(j.dump())); };
  auto until = [&](const std::function<bool(const json&)>& pred) {
    for (json j = read();; j = read())
      if (pred(j)) return j;
  };
  auto step_at_least = [](std::int64_t s) {
    return [s](const json& j) { return j["type"] == "state" && j["step"].get<std::int64_t>() >= s; };
  };
  until([](const json& j) { return j["type"] == "state"; });
  send({{"type", "control"}, {"action", "resume"}});
  until(step_at_least(600));
  send({{"type", "intervene"}, {"joint_torque", {0, 0.3, 0, -0.4, 0, 0, 0, 0}}});
  until(step_at_least(900));
  send({{"type", "control"}, {"action", "set_alpha"}, {"value", 0.6}});
  send({{"type", "intervene"}, {"planar_force", {0.5, -1.0}}});
  until(step_at_least(1400));
  send({{"type", "intervene"}, {"joint_torque", {0, 0, 0, 0, 0, 0, 0, 0}}});
  until([](const json& j) { return j["type"] == "state" && j["config"]["done"].get<bool>(); });
  send({{"type", "control"}, {"action", "quit"}});
  RetouchResult r = result.get();
  boost::system::error_code ec;
  ws.close(websocket::close_code::normal, ec);
  return r;
}

void criterion8(const Pipeline& p) {
  const TeachResult teach2 = run_teach(p.sc);
  const bool teach_same = teach2.tape == p.teach.tape && teach2.log == p.teach.log;
  const CopyResult copy2 = run_copy(p.fast, p.sc);
  const bool copy_same = copy2.log == p.copies_3x.front().log;
  const RetouchResult rt2 = run_retouch(p.fast, p.sc, p.fix);
  const bool retouch_same = rt2.tape == p.retouched.tape && rt2.log == p.retouched.log;

  Scenario noisy = p.sc;
  noisy.sensor_noise = true;
  noisy.seed = 17;
  const bool noisy_same = run_copy(p.fast, noisy, 3).log == run_copy(p.fast, noisy, 3).log;

  const RetouchResult live = live_session(p.fast, p.sc, p.fix);
  const RetouchResult replay = run_retouch(p.fast, p.sc, live.timeline);
  const bool live_same = live.tape == replay.tape && live.log == replay.log && live.tape.size() == p.fast.size();
  report(8, teach_same && copy_same && retouch_same && noisy_same && live_same,
         fmt("teach %s, copy %s, retouch %s, seeded noise %s, live session replay %s (%zu ticks, %zu timeline "
             "entries)",
             teach_same ? "identical" : "DIFFERS", copy_same ? "identical" : "DIFFERS",
             retouch_same ? "identical" : "DIFFERS", noisy_same ? "identical" : "DIFFERS",
             live_same ? "identical" : "DIFFERS", live.tape.size(),
             live.timeline.ticks.size() + live.timeline.alpha_changes.size()));
}

void guarded(int n, const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(n, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  Pipeline p;
  try {
    p = run_pipeline();
  } catch (const std::exception& e) {
    std::printf("pipeline failed: %s\n", e.what());
    for (int n : {1, 2, 6, 7, 8}) report(n, false, "pipeline did not run");
    guarded(3, criterion3);
    guarded(4, criterion4);
    guarded(5, criterion5);
    return 1;
  }
  guarded(1, [&] { criterion1(p); });
  guarded(2, [&] { criterion2(p); });
  guarded(3, criterion3);
  guarded(4, criterion4);
  guarded(5, criterion5);
  guarded(6, [&] { criterion6(p); });
  guarded(7, [&] { criterion7(p); });
  guarded(8, [&] { criterion8(p); });
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
