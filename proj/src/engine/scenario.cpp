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

#include "retouch/engine/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string_view>

#include "retouch/detail/text.hpp"
#include "retouch/errors.hpp"
#include "retouch/tape.hpp"

namespace retouch::engine {

namespace {

constexpr std::string_view kMagic = "# retouch-scenario v1";

using detail::split;
using detail::trim;
using tape::format_double;
using tape::parse_double;

// One scalar, Vec2 or JointVec field reachable by its file key.
struct Field {
  std::string_view key;
  std::function<double*(Scenario&)> scalar;
  std::function<model::Vec2*(Scenario&)> vec2;
  std::function<JointVec*(Scenario&)> joints;
};

std::vector<Field> make_fields() {
  std::vector<Field> f;
  const auto scalar = [&](std::string_view key, auto get) { f.push_back({key, get, {}, {}}); };
  const auto vec2 = [&](std::string_view key, auto get) { f.push_back({key, {}, get, {}}); };
  const auto joints = [&](std::string_view key, auto get) { f.push_back({key, {}, {}, get}); };

  scalar("duration", [](Scenario& s) { return &s.duration; });
  scalar("dt", [](Scenario& s) { return &s.dt; });
  scalar("copy_tail", [](Scenario& s) { return &s.copy_tail; });
  scalar("noise_quantum", [](Scenario& s) { return &s.noise_quantum; });

  scalar("gains.kp", [](Scenario& s) { return &s.gains.kp; });
  scalar("gains.kd", [](Scenario& s) { return &s.gains.kd; });
  scalar("gains.kf", [](Scenario& s) { return &s.gains.kf; });
  scalar("gains.alpha", [](Scenario& s) { return &s.gains.alpha; });

  scalar("robot.m2", [](Scenario& s) { return &s.params.m2; });
  scalar("robot.m3", [](Scenario& s) { return &s.params.m3; });
  scalar("robot.m4", [](Scenario& s) { return &s.params.m4; });
  scalar("robot.c2", [](Scenario& s) { return &s.params.c2; });
  scalar("robot.c3", [](Scenario& s) { return &s.params.c3; });
  scalar("robot.c4", [](Scenario& s) { return &s.params.c4; });
  scalar("robot.l24", [](Scenario& s) { return &s.params.l24; });
  scalar("robot.ix2", [](Scenario& s) { return &s.params.ix2; });
  scalar("robot.ix3", [](Scenario& s) { return &s.params.ix3; });
  scalar("robot.iy2", [](Scenario& s) { return &s.params.iy2; });
  scalar("robot.g0", [](Scenario& s) { return &s.params.g0; });
  scalar("robot.j_floor", [](Scenario& s) { return &s.params.j_floor; });
  joints("robot.joint_inertia", [](Scenario& s) { return &s.params.joint_inertia; });
  joints("robot.friction", [](Scenario& s) { return &s.params.friction; });
  joints("robot.cutoff", [](Scenario& s) { return &s.params.cutoff; });

  vec2("env.source_hole", [](Scenario& s) { return &s.env.source_hole; });
  vec2("env.target_hole", [](Scenario& s) { return &s.env.target_hole; });
  scalar("env.hole_clearance", [](Scenario& s) { return &s.env.hole_clearance; });
  scalar("env.hole_chamfer", [](Scenario& s) { return &s.env.hole_chamfer; });
  scalar("env.hole_depth", [](Scenario& s) { return &s.env.hole_depth; });
  scalar("env.rack_half_width", [](Scenario& s) { return &s.env.rack_half_width; });
  scalar("env.top_slip_force", [](Scenario& s) { return &s.env.top_slip_force; });
  scalar("env.wall_stiffness", [](Scenario& s) { return &s.env.wall_stiffness; });
  scalar("env.wall_damping", [](Scenario& s) { return &s.env.wall_damping; });
  scalar("env.grip_threshold", [](Scenario& s) { return &s.env.grip_threshold; });
  scalar("env.grip_contact_angle", [](Scenario& s) { return &s.env.grip_contact_angle; });
  scalar("env.grip_stiffness", [](Scenario& s) { return &s.env.grip_stiffness; });
  scalar("env.capture_radius", [](Scenario& s) { return &s.env.capture_radius; });
  scalar("env.insertion_depth_goal", [](Scenario& s) { return &s.env.insertion_depth_goal; });
  scalar("env.lateral_force_limit", [](Scenario& s) { return &s.env.lateral_force_limit; });

  scalar("hand.stiffness", [](Scenario& s) { return &s.hand.stiffness; });
  scalar("hand.damping", [](Scenario& s) { return &s.hand.damping; });
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = make_fields();
  return f;
}

std::vector<double> parse_list(std::string_view rhs, std::size_t n, std::size_t line,
                               std::string_view key) {
  const auto parts = split(rhs, ',');
  if (parts.size() != n) {
    throw FormatError(std::string(key) + " expects " + std::to_string(n) + " values, got " +
                          std::to_string(parts.size()),
                      line);
  }
  std::vector<double> out;
  out.reserve(n);
  for (std::string_view p : parts) out.push_back(parse_double(p, line));
  return out;
}

bool parse_bool(std::string_view v, std::size_t line) {
  v = trim(v);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw FormatError("expected true/false, got '" + std::string(v) + "'", line);
}

std::string join(const JointVec& v) {
  std::string s;
  for (std::size_t i = 0; i < kJoints; ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s;
}

double min_jerk(double s) {
  const double s3 = s * s * s;
  return s3 * (10.0 - 15.0 * s + 6.0 * s * s);
}

}  // namespace

JointVec HandModel::target(double t) const {
  if (waypoints.empty()) throw ConfigError("hand model has no waypoints");
  if (t <= waypoints.front().t) return waypoints.front().q;
  if (t >= waypoints.back().t) return waypoints.back().q;
  auto hi = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                             [](double x, const Waypoint& w) { return x < w.t; });
  const Waypoint& b = *hi;
  const Waypoint& a = *std::prev(hi);
  const double s = min_jerk((t - a.t) / (b.t - a.t));
  return a.q + s * (b.q - a.q);
}

JointVec HandModel::torque(double t, const JointVec& q, const JointVec& dq) const {
  return stiffness * (target(t) - q) - damping * dq;
}

void HandModel::validate() const {
  if (waypoints.empty()) throw ConfigError("hand model needs at least one waypoint");
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    if (!waypoints[i].q.all_finite() || !std::isfinite(waypoints[i].t))
      throw ConfigError("hand waypoints must be finite");
    if (i > 0 && !(waypoints[i].t > waypoints[i - 1].t))
      throw ConfigError("hand waypoints must be strictly time-ordered");
  }
  if (!(stiffness >= 0.0) || !(damping >= 0.0))
    throw ConfigError("hand stiffness and damping must be >= 0");
}

JointVec Scenario::initial_pose() const {
  if (hand.waypoints.empty()) return JointVec::zero();
  return hand.waypoints.front().q;
}

std::int64_t Scenario::steps() const { return static_cast<std::int64_t>(std::llround(duration / dt)); }

void Scenario::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("duration must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
  if (!(copy_tail >= 0.0)) throw ConfigError("copy_tail must be >= 0");
  if (sensor_noise && !(noise_quantum > 0.0)) throw ConfigError("noise_quantum must be > 0");
  env.validate();
  params.validate();
  gains.validate();
  hand.validate();
  intervention.validate(duration);
}

Scenario default_scenario() {
  Scenario s;
  const model::Vec2 src = s.env.source_hole;
  const model::Vec2 dst = s.env.target_hole;
  const double grasp_y = src.y - s.env.insertion_depth_goal;
  const double carry_y = src.y + 0.03;
  const double pre_y = dst.y + 0.004;
  const double seat_y = dst.y - s.env.insertion_depth_goal - 0.005;
  constexpr double kOpen = 0.0;
  constexpr double kClosed = 0.7;

  const auto pose = [&](double x, double y, double grip) {
    auto q = model::inverse_kinematics_planar({x, y}, s.params);
    if (!q) throw ConfigError("default scenario pose out of reach");
    (*q)[7] = grip;
    return *q;
  };
  s.hand.waypoints = {
      {0.0, pose(src.x, grasp_y, kOpen)},
      {2.0, pose(src.x, grasp_y, kOpen)},
      {5.0, pose(src.x, grasp_y, kClosed)},
      {9.0, pose(src.x, carry_y, kClosed)},
      {11.0, pose(dst.x, pre_y, kClosed)},
      {12.0, pose(dst.x, seat_y, kClosed)},
      {15.0, pose(dst.x, seat_y, kClosed)},
      {18.0, pose(dst.x, seat_y, kOpen)},
      {22.0, pose(dst.x, carry_y, kOpen)},
  };
  return s;
}

Scenario parse_scenario(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kMagic)
    throw FormatError("missing '# retouch-scenario v1' header", 1);
  Scenario s;
  s.hand.waypoints.clear();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos) throw FormatError("expected 'key = value'", lineno);
    const std::string_view key = trim(body.substr(0, eq));
    const std::string_view rhs = trim(body.substr(eq + 1));

    if (key == "waypoint") {
      const auto v = parse_list(rhs, 1 + kJoints, lineno, key);
      Waypoint w;
      w.t = v[0];
      std::copy(v.begin() + 1, v.end(), w.q.v.begin());
      s.hand.waypoints.push_back(w);
      continue;
    }
    if (key == "window") {
      s.intervention.windows.push_back(parse_window(rhs, lineno));
      continue;
    }
    if (key == "tick") {
      s.intervention.ticks.push_back(parse_tick(rhs, lineno));
      continue;
    }
    if (key == "alpha") {
      s.intervention.alpha_changes.push_back(parse_alpha_change(rhs, lineno));
      continue;
    }
    if (key == "seed") {
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(rhs.data(), rhs.data() + rhs.size(), v);
      if (ec != std::errc() || ptr != rhs.data() + rhs.size())
        throw FormatError("seed must be a non-negative integer", lineno);
      s.seed = v;
      continue;
    }
    if (key == "realtime") {
      s.realtime = parse_bool(rhs, lineno);
      continue;
    }
    if (key == "sensor_noise") {
      s.sensor_noise = parse_bool(rhs, lineno);
      continue;
    }

    const auto it = std::find_if(fields().begin(), fields().end(),
                                 [&](const Field& f) { return f.key == key; });
    if (it == fields().end()) throw FormatError("unknown key '" + std::string(key) + "'", lineno);
    if (it->scalar) {
      *it->scalar(s) = parse_double(rhs, lineno);
    } else if (it->vec2) {
      const auto v = parse_list(rhs, 2, lineno, key);
      *it->vec2(s) = {v[0], v[1]};
    } else {
      const auto v = parse_list(rhs, kJoints, lineno, key);
      std::copy(v.begin(), v.end(), it->joints(s)->v.begin());
    }
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open scenario file: " + path.string());
  return parse_scenario(f);
}

void write_scenario(const Scenario& sc, std::ostream& out) {
  Scenario s = sc;
  out << kMagic << '\n';
  out << "seed = " << s.seed << '\n';
  out << "realtime = " << (s.realtime ? "true" : "false") << '\n';
  out << "sensor_noise = " << (s.sensor_noise ? "true" : "false") << '\n';
  for (const Field& f : fields()) {
    out << f.key << " = ";
    if (f.scalar) {
      out << format_double(*f.scalar(s));
    } else if (f.vec2) {
      const model::Vec2 v = *f.vec2(s);
      out << format_double(v.x) << ", " << format_double(v.y);
    } else {
      out << join(*f.joints(s));
    }
    out << '\n';
  }
  for (const Waypoint& w : s.hand.waypoints) out << "waypoint = " << format_double(w.t) << ", " << join(w.q) << '\n';
  for (const InterventionWindow& w : s.intervention.windows) out << "window = " << format_window(w) << '\n';
  for (const InterventionTick& t : s.intervention.ticks) out << "tick = " << format_tick(t) << '\n';
  for (const AlphaChange& a : s.intervention.alpha_changes)
    out << "alpha = " << a.step << ", " << format_double(a.alpha) << '\n';
}

std::uint64_t scenario_hash(const Scenario& s) {
  std::ostringstream os;
  write_scenario(s, os);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace retouch::engine
