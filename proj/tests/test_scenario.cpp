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

#include <filesystem>
#include <sstream>

#include "retouch/engine/intervention.hpp"
#include "retouch/engine/scenario.hpp"
#include "retouch/errors.hpp"

namespace {

using namespace retouch;
using namespace retouch::engine;
namespace fs = std::filesystem;

const fs::path kScenarios = RETOUCH_SCENARIOS;

std::string text_of(const Scenario& s) {
  std::ostringstream out;
  write_scenario(s, out);
  return out.str();
}

Scenario parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

TEST(Scenario, DefaultRoundTripsThroughText) {
  const Scenario s = default_scenario();
  const std::string text = text_of(s);
  EXPECT_EQ(text_of(parse_text(text)), text);
  EXPECT_EQ(scenario_hash(parse_text(text)), scenario_hash(s));
}

TEST(Scenario, ShippedFileMatchesDefault) {
  const Scenario shipped = load_scenario(kScenarios / "tube.scn");
  EXPECT_EQ(text_of(shipped), text_of(default_scenario()));
  EXPECT_EQ(shipped.steps(), 12000);
  EXPECT_EQ(shipped.gains.kp, 256.0);
  EXPECT_EQ(shipped.params.friction[3], 0.182);
  EXPECT_EQ(shipped.params.cutoff[4], 90.0);
}

TEST(Scenario, FieldsOverrideDefaults) {
  std::string text = text_of(default_scenario());
  text += "seed = 42\ngains.alpha = 0.25\nsensor_noise = true\n";
  const Scenario s = parse_text(text);
  EXPECT_EQ(s.seed, 42u);
  EXPECT_EQ(s.gains.alpha, 0.25);
  EXPECT_TRUE(s.sensor_noise);
  EXPECT_NE(scenario_hash(s), scenario_hash(default_scenario()));
}

TEST(Scenario, RejectsMalformedInput) {
  const std::string base = text_of(default_scenario());
  EXPECT_THROW(parse_text("seed = 1\n"), FormatError);
  EXPECT_THROW(parse_text(base + "gains.kq = 3\n"), FormatError);
  EXPECT_THROW(parse_text(base + "robot.cutoff = 1, 2, 3\n"), FormatError);
  EXPECT_THROW(parse_text(base + "realtime = maybe\n"), FormatError);
  EXPECT_THROW(parse_text(base + "seed = -4\n"), FormatError);
  EXPECT_THROW(parse_text(base + "duration\n"), FormatError);
  EXPECT_THROW(parse_text(base + "gains.alpha = 2\n"), ConfigError);
  EXPECT_THROW(parse_text(base + "duration = 0\n"), ConfigError);
  try {
    parse_text(base + "bogus = 1\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_GT(e.line(), 1u);
  }
}

TEST(HandModel, InterpolatesWithMinimumJerk) {
  HandModel h;
  h.waypoints = {{0.0, JointVec::zero()}, {2.0, JointVec::filled(1.0)}};
  EXPECT_EQ(h.target(-1.0), JointVec::zero());
  EXPECT_EQ(h.target(5.0), JointVec::filled(1.0));
  EXPECT_NEAR(h.target(1.0)[3], 0.5, 1e-15);
  EXPECT_NEAR(h.target(0.5)[0], 0.103515625, 1e-15);
  const JointVec tau = h.torque(2.0, JointVec::filled(0.9), JointVec::filled(0.2));
  EXPECT_NEAR(tau[2], 20.0 * 0.1 - 0.5 * 0.2, 1e-14);
}

TEST(HandModel, Validation) {
  HandModel h;
  EXPECT_THROW(h.validate(), ConfigError);
  h.waypoints = {{1.0, {}}, {1.0, {}}};
  EXPECT_THROW(h.validate(), ConfigError);
  h.waypoints = {{0.0, {}}};
  h.stiffness = -1;
  EXPECT_THROW(h.validate(), ConfigError);
}

InterventionProfile parse_int(const std::string& text) {
  std::istringstream in(text);
  return parse_intervention(in);
}

TEST(Intervention, ShippedFixParses) {
  const InterventionProfile p = load_intervention(kScenarios / "tube_x3_fix.int");
  ASSERT_EQ(p.windows.size(), 1u);
  const InterventionWindow& w = p.windows[0];
  EXPECT_EQ(w.kind, InterventionWindow::Kind::kSpring);
  EXPECT_EQ(w.t_start, 3.0);
  EXPECT_EQ(w.t_end, 4.0);
  EXPECT_EQ(w.stiffness, 1.2);
  EXPECT_EQ(w.damping, 0.6);
  EXPECT_TRUE(w.active[1] && w.active[3]);
  EXPECT_FALSE(w.active[0] || w.active[2] || w.active[7]);
  EXPECT_NO_THROW(p.validate(8.0));
}

TEST(Intervention, RoundTripsEveryEntryKind) {
  const InterventionProfile p = parse_int(
      "# retouch-intervention v1\n"
      "# comment\n"
      "window = 1, 2, torque, 0, 0.5, 0, -0.25, 0, 0, 0, 0\n"
      "window = 3, 4.5, spring, 2, 0.1, -, 0.3, -, 1.2, -, -, -, -\n"
      "tick = 10, 0, 0, 0, 1, 0, 0, 0, 0\n"
      "tick = 25, 0, 0, 0, 0, 0, 0, 0, 0\n"
      "alpha = 100, 0.8\n");
  std::ostringstream out;
  write_intervention(p, out);
  EXPECT_EQ(parse_int(out.str()), p);
  EXPECT_EQ(p.ticks.size(), 2u);
  EXPECT_EQ(p.alpha_changes[0].alpha, 0.8);
}

TEST(Intervention, TorqueSemantics) {
  InterventionProfile p = parse_int(
      "# retouch-intervention v1\n"
      "window = 1, 2, torque, 9, 0.5, 0, -0.25, 0, 0, 0, 0\n"
      "window = 3, 4, spring, 2, 0.1, -, 0.3, -, -, -, -, -, -\n"
      "tick = 10, 0, 0, 0, 1, 0, 0, 0, 0\n"
      "tick = 25, 0, 0, 0, 0, 0, 0, 0, 0\n");
  const JointVec q = JointVec::filled(0.1), dq = JointVec::filled(1.0);
  EXPECT_EQ(p.torque(0, 0.0, q, dq), JointVec::zero());
  const JointVec in_torque = p.torque(0, 1.5, q, dq);
  EXPECT_EQ(in_torque[0], kInterventionLimit);
  EXPECT_EQ(in_torque[3], -0.25);
  EXPECT_EQ(p.torque(0, 2.0, q, dq), JointVec::zero());
  const JointVec spring = p.torque(0, 3.5, q, dq);
  EXPECT_NEAR(spring[1], 2.0 * 0.2 - 0.1, 1e-15);
  EXPECT_EQ(spring[0], 0.0);
  EXPECT_EQ(p.torque(9, 0.0, q, dq)[3], 0.0);
  EXPECT_EQ(p.torque(10, 0.0, q, dq)[3], 1.0);
  EXPECT_EQ(p.torque(24, 0.0, q, dq)[3], 1.0);
  EXPECT_EQ(p.torque(25, 0.0, q, dq)[3], 0.0);
}

TEST(Intervention, AlphaTimeline) {
  InterventionProfile p;
  p.alpha_changes = {{100, 0.0}, {200, 1.0}};
  EXPECT_EQ(p.alpha(0, 0.5), 0.5);
  EXPECT_EQ(p.alpha(100, 0.5), 0.0);
  EXPECT_EQ(p.alpha(250, 0.5), 1.0);
  p.alpha_changes = {{100, 0.0}, {100, 1.0}};
  EXPECT_THROW(p.validate(10.0), ConfigError);
  p.alpha_changes = {{100, 1.5}};
  EXPECT_THROW(p.validate(10.0), ConfigError);
}

TEST(Intervention, ValidationRejectsBadWindows) {
  const auto overlapping = parse_int(
      "# retouch-intervention v1\n"
      "window = 1, 3, torque, 0, 0, 0, 0, 0, 0, 0, 0\n"
      "window = 2, 4, torque, 0, 0, 0, 0, 0, 0, 0, 0\n");
  EXPECT_THROW(overlapping.validate(24.0), ConfigError);
  const auto outside = parse_int(
      "# retouch-intervention v1\n"
      "window = 1, 30, torque, 0, 0, 0, 0, 0, 0, 0, 0\n");
  EXPECT_THROW(outside.validate(24.0), ConfigError);
  const auto empty = parse_int("# retouch-intervention v1\nwindow = 2, 2, torque, 0, 0, 0, 0, 0, 0, 0, 0\n");
  EXPECT_THROW(empty.validate(24.0), ConfigError);
}

TEST(Intervention, ParseErrors) {
  EXPECT_THROW(parse_int("window = 1, 2, torque, 0, 0, 0, 0, 0, 0, 0, 0\n"), FormatError);
  EXPECT_THROW(parse_int("# retouch-intervention v1\npush = 1\n"), FormatError);
  EXPECT_THROW(parse_int("# retouch-intervention v1\nwindow = 1, 2, shove, 0\n"), FormatError);
  EXPECT_THROW(parse_int("# retouch-intervention v1\nwindow = 1, 2, torque, 0, 0\n"), FormatError);
  EXPECT_THROW(parse_int("# retouch-intervention v1\ntick = x, 0, 0, 0, 0, 0, 0, 0, 0\n"), FormatError);
  EXPECT_THROW(parse_int("# retouch-intervention v1\nalpha = 3\n"), FormatError);
}

TEST(Intervention, ClampIsSymmetric) {
  const JointVec c = clamp_intervention({7, -7, 4.9, -5, 0, 0, 0, 0});
  EXPECT_EQ(c, (JointVec{5, -5, 4.9, -5, 0, 0, 0, 0}));
}

}  // namespace
