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

#include "retouch/engine/intervention.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "retouch/detail/text.hpp"
#include "retouch/errors.hpp"
#include "retouch/tape.hpp"

namespace retouch::engine {

namespace {

constexpr std::string_view kMagic = "# retouch-intervention v1";

using detail::split;
using detail::trim;
using tape::format_double;
using tape::parse_double;

std::int64_t parse_step(std::string_view field, std::size_t line) {
  field = trim(field);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || v < 0)
    throw FormatError("bad step index '" + std::string(field) + "'", line);
  return v;
}

}  // namespace

JointVec clamp_intervention(const JointVec& tau) {
  JointVec out;
  for (std::size_t i = 0; i < kJoints; ++i)
    out[i] = std::clamp(tau[i], -kInterventionLimit, kInterventionLimit);
  return out;
}

void InterventionProfile::validate(double duration) const {
  double last_end = -1.0;
  for (const InterventionWindow& w : windows) {
    if (!(w.t_start < w.t_end)) throw ConfigError("intervention window must have t_start < t_end");
    if (w.t_start < 0.0 || w.t_end > duration)
      throw ConfigError("intervention window lies outside the run");
    if (w.t_start < last_end) throw ConfigError("intervention windows overlap or are unordered");
    if (w.stiffness < 0.0 || w.damping < 0.0)
      throw ConfigError("intervention spring stiffness/damping must be >= 0");
    if (!w.value.all_finite()) throw ConfigError("intervention values must be finite");
    last_end = w.t_end;
  }
  std::int64_t last = -1;
  for (const InterventionTick& t : ticks) {
    if (t.step <= last) throw ConfigError("intervention ticks must have increasing steps");
    if (!t.torque.all_finite()) throw ConfigError("intervention tick torque must be finite");
    last = t.step;
  }
  last = -1;
  for (const AlphaChange& a : alpha_changes) {
    if (a.step <= last) throw ConfigError("alpha changes must have increasing steps");
    if (!(a.alpha >= 0.0 && a.alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    last = a.step;
  }
}

double InterventionProfile::alpha(std::int64_t step, double base) const {
  for (const AlphaChange& a : alpha_changes) {
    if (a.step > step) break;
    base = a.alpha;
  }
  return base;
}

std::optional<InterventionWindow> InterventionProfile::window_at(double t) const {
  for (const InterventionWindow& w : windows) {
    if (t >= w.t_start && t < w.t_end) return w;
  }
  return std::nullopt;
}

JointVec InterventionProfile::torque(std::int64_t step, double t, const JointVec& q,
                                     const JointVec& dq) const {
  JointVec tau;
  if (auto w = window_at(t)) {
    if (w->kind == InterventionWindow::Kind::kTorque) {
      tau = w->value;
    } else {
      for (std::size_t i = 0; i < kJoints; ++i) {
        if (w->active[i]) tau[i] = w->stiffness * (w->value[i] - q[i]) - w->damping * dq[i];
      }
    }
  }
  if (!ticks.empty()) {
    // Last tick at or before this step; held until superseded.
    auto it = std::upper_bound(ticks.begin(), ticks.end(), step,
                               [](std::int64_t s, const InterventionTick& k) { return s < k.step; });
    if (it != ticks.begin()) tau = tau + std::prev(it)->torque;
  }
  return clamp_intervention(tau);
}

InterventionWindow parse_window(std::string_view rhs, std::size_t line) {
  const auto f = split(rhs, ',');
  if (f.size() < 3) throw FormatError("window needs t0, t1, kind, ...", line);
  InterventionWindow w;
  w.t_start = parse_double(f[0], line);
  w.t_end = parse_double(f[1], line);
  const std::string_view kind = trim(f[2]);
  if (kind == "torque") {
    if (f.size() != 3 + kJoints) throw FormatError("torque window needs 8 torques", line);
    w.kind = InterventionWindow::Kind::kTorque;
    for (std::size_t i = 0; i < kJoints; ++i) w.value[i] = parse_double(f[3 + i], line);
  } else if (kind == "spring") {
    if (f.size() != 5 + kJoints) throw FormatError("spring window needs k, b and 8 targets", line);
    w.kind = InterventionWindow::Kind::kSpring;
    w.stiffness = parse_double(f[3], line);
    w.damping = parse_double(f[4], line);
    for (std::size_t i = 0; i < kJoints; ++i) {
      const std::string_view v = trim(f[5 + i]);
      if (v == "-") continue;
      w.value[i] = parse_double(v, line);
      w.active[i] = true;
    }
  } else {
    throw FormatError("unknown window kind '" + std::string(kind) + "'", line);
  }
  return w;
}

InterventionTick parse_tick(std::string_view rhs, std::size_t line) {
  const auto f = split(rhs, ',');
  if (f.size() != 1 + kJoints) throw FormatError("tick needs step and 8 torques", line);
  InterventionTick t;
  t.step = parse_step(f[0], line);
  for (std::size_t i = 0; i < kJoints; ++i) t.torque[i] = parse_double(f[1 + i], line);
  return t;
}

AlphaChange parse_alpha_change(std::string_view rhs, std::size_t line) {
  const auto f = split(rhs, ',');
  if (f.size() != 2) throw FormatError("alpha needs step and value", line);
  return {parse_step(f[0], line), parse_double(f[1], line)};
}

std::string format_window(const InterventionWindow& w) {
  std::string s = format_double(w.t_start) + ", " + format_double(w.t_end);
  if (w.kind == InterventionWindow::Kind::kTorque) {
    s += ", torque";
    for (double x : w.value.v) s += ", " + format_double(x);
  } else {
    s += ", spring, " + format_double(w.stiffness) + ", " + format_double(w.damping);
    for (std::size_t i = 0; i < kJoints; ++i) s += ", " + (w.active[i] ? format_double(w.value[i]) : "-");
  }
  return s;
}

std::string format_tick(const InterventionTick& t) {
  std::string s = std::to_string(t.step);
  for (double x : t.torque.v) s += ", " + format_double(x);
  return s;
}

InterventionProfile parse_intervention(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kMagic)
    throw FormatError("missing '# retouch-intervention v1' header", 1);
  InterventionProfile p;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos) throw FormatError("expected 'key = value'", lineno);
    const std::string_view key = trim(body.substr(0, eq));
    const std::string_view rhs = trim(body.substr(eq + 1));
    if (key == "window") {
      p.windows.push_back(parse_window(rhs, lineno));
    } else if (key == "tick") {
      p.ticks.push_back(parse_tick(rhs, lineno));
    } else if (key == "alpha") {
      p.alpha_changes.push_back(parse_alpha_change(rhs, lineno));
    } else {
      throw FormatError("unknown key '" + std::string(key) + "'", lineno);
    }
  }
  return p;
}

InterventionProfile load_intervention(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open intervention file: " + path.string());
  return parse_intervention(f);
}

void write_intervention(const InterventionProfile& p, std::ostream& out) {
  out << kMagic << '\n';
  for (const InterventionWindow& w : p.windows) out << "window = " << format_window(w) << '\n';
  for (const InterventionTick& t : p.ticks) out << "tick = " << format_tick(t) << '\n';
  for (const AlphaChange& a : p.alpha_changes)
    out << "alpha = " << a.step << ", " << format_double(a.alpha) << '\n';
}

void save_intervention(const InterventionProfile& p, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write intervention file: " + path.string());
  write_intervention(p, f);
}

}  // namespace retouch::engine
