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

#include "retouch/engine/runlog.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>

#include "retouch/detail/text.hpp"
#include "retouch/errors.hpp"
#include "retouch/tape.hpp"

namespace retouch::engine {

namespace {

using tape::format_double;

constexpr const char* kVecNames[] = {"q",      "dq",   "dqhat",  "tauhat", "tauenv", "tauapp",
                                     "diff",   "common", "comp", "tauref", "qtgt",   "dqtgt"};

const JointVec* vec_field(const RobotRecord& r, std::size_t i) {
  const JointVec* v[] = {&r.q,   &r.dq, &r.dq_hat, &r.tau_res_hat, &r.tau_res_true, &r.tau_applied,
                         &r.out.diff_mode, &r.out.common_mode, &r.out.compensation,
                         &r.out.tau_ref, &r.out.q_target, &r.out.dq_target};
  return v[i];
}

void robot_header(std::string& h, char prefix) {
  for (const char* name : kVecNames) {
    for (std::size_t j = 1; j <= kJoints; ++j) {
      h += ',';
      h += prefix;
      h += '_';
      h += name;
      h += std::to_string(j);
    }
  }
  h += ',';
  h += prefix;
  h += "_sat";
}

void robot_row(std::string& row, const RobotRecord& r) {
  for (std::size_t i = 0; i < std::size(kVecNames); ++i) {
    for (double x : vec_field(r, i)->v) {
      row += ',';
      row += format_double(x);
    }
  }
  row += r.saturated ? ",1" : ",0";
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

const char* to_string(RunKind k) {
  switch (k) {
    case RunKind::kTeach: return "teach";
    case RunKind::kCopy: return "copy";
    case RunKind::kRetouch: return "retouch";
  }
  return "?";
}

void export_log(const RunLog& log, std::ostream& out) {
  out << "# retouch-log v1, kind=" << to_string(log.meta.kind) << ", dt=" << format_double(log.meta.dt)
      << ", seed=" << log.meta.seed << ", scenario=" << hex(log.meta.scenario_hash) << '\n';
  const bool has_l = !log.steps.empty() && log.steps.front().leader.has_value();
  const bool has_f = !log.steps.empty() && log.steps.front().follower.has_value();
  const bool has_e = !log.steps.empty() && log.steps.front().editor.has_value();

  std::string h = "step,t";
  if (has_l) robot_header(h, 'L');
  if (has_f) robot_header(h, 'F');
  if (has_e) robot_header(h, 'E');
  h += ",in_contact,lateral_force,depth,tube_held,grip_torque,fx,fy,tube,tube_x,tube_y";
  for (std::size_t j = 1; j <= kJoints; ++j) h += ",int" + std::to_string(j);
  out << h << '\n';

  std::string row;
  for (const StepRecord& r : log.steps) {
    row = std::to_string(r.step) + ',' + format_double(r.t);
    if (has_l) robot_row(row, *r.leader);
    if (has_f) robot_row(row, *r.follower);
    if (has_e) robot_row(row, *r.editor);
    const model::ContactInfo& c = r.contact;
    row += c.in_contact ? ",1," : ",0,";
    row += format_double(c.lateral_force) + ',' + format_double(c.depth);
    row += c.tube_held ? ",1," : ",0,";
    row += format_double(c.grip_torque) + ',' + format_double(c.force.x) + ',' +
           format_double(c.force.y) + ',' + model::to_string(r.tube.where) + ',' +
           format_double(r.tube.bottom.x) + ',' + format_double(r.tube.bottom.y);
    for (double x : r.intervention.v) row += ',' + format_double(x);
    row += '\n';
    out << row;
  }
}

void export_log(const RunLog& log, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write log: " + path.string());
  export_log(log, f);
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

Trace read_log_column(std::istream& in, const std::string& column) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# retouch-log v1", 0) != 0)
    throw FormatError("missing '# retouch-log v1' header", 1);
  if (!std::getline(in, line)) throw FormatError("missing column header", 2);
  const auto names = detail::split(detail::trim(line), ',');
  const auto it = std::find(names.begin(), names.end(), column);
  if (it == names.end()) throw FormatError("log has no column '" + column + "'", 2);
  const std::size_t col = static_cast<std::size_t>(it - names.begin());
  const std::size_t t_col = 1;

  Trace tr;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = detail::trim(line);
    if (body.empty()) continue;
    const auto f = detail::split(body, ',');
    if (f.size() != names.size()) {
      throw FormatError("expected " + std::to_string(names.size()) + " columns, got " +
                            std::to_string(f.size()),
                        lineno);
    }
    tr.t.push_back(tape::parse_double(f[t_col], lineno));
    tr.value.push_back(tape::parse_double(f[col], lineno));
  }
  return tr;
}

Trace read_log_column(const std::filesystem::path& path, const std::string& column) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open log: " + path.string());
  return read_log_column(f, column);
}

}  // namespace retouch::engine
