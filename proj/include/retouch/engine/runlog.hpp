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

// Per-step record of a run and its comma-separated export.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "retouch/control.hpp"
#include "retouch/model.hpp"

namespace retouch::engine {

struct RobotRecord {
  JointVec q;             // true angle
  JointVec dq;            // true velocity
  JointVec dq_hat;        // pseudo-differentiated velocity
  JointVec tau_res_hat;   // RFOB estimate
  JointVec tau_res_true;  // torque the environment actually exerted
  JointVec tau_applied;   // tau_ref after saturation
  control::ControlOutput out;
  bool saturated = false;
  friend bool operator==(const RobotRecord&, const RobotRecord&) = default;
};

struct StepRecord {
  std::int64_t step = 0;
  double t = 0.0;
  std::optional<RobotRecord> leader;
  std::optional<RobotRecord> follower;
  std::optional<RobotRecord> editor;
  model::ContactInfo contact;  // follower's environment
  model::TubeState tube;
  JointVec intervention;  // torque applied to the editor
  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

enum class RunKind { kTeach, kCopy, kRetouch };
const char* to_string(RunKind k);

struct RunMeta {
  RunKind kind = RunKind::kTeach;
  std::uint64_t scenario_hash = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  friend bool operator==(const RunMeta&, const RunMeta&) = default;
};

struct RunLog {
  RunMeta meta;
  std::vector<StepRecord> steps;
  friend bool operator==(const RunLog&, const RunLog&) = default;
};

/// Writes the log as CSV: a `# retouch-log v1` header line, a column header,
/// then one row per step. Robot columns carry an L_/F_/E_ prefix and are
/// present only for robots the run has.
void export_log(const RunLog& log, std::ostream& out);
void export_log(const RunLog& log, const std::filesystem::path& path);

/// Reads the time column and one named column (e.g. "F_q4") from an
/// exported log. Throws FormatError if the column is missing.
struct Trace {
  std::vector<double> t;
  std::vector<double> value;
};
Trace read_log_column(std::istream& in, const std::string& column);
Trace read_log_column(const std::filesystem::path& path, const std::string& column);

}  // namespace retouch::engine
