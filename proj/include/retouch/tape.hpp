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

// Motion data: the follower command values recorded every control step.
//
// On-disk format (text, one sample per line):
//   # retouch-tape v1, dt=<dt>, factor=<k>[, source=<text>]
//   step,t,q1..q8,dq1..dq8,tau1..tau8
//   0,0,...
// Numbers use the shortest decimal form that round-trips exactly.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "retouch/control.hpp"

namespace retouch::tape {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kColumns = 2 + 3 * kJoints;  // 26

struct TapeSample {
  std::int64_t step = 0;
  double t = 0.0;
  control::CommandFrame frame;
  friend bool operator==(const TapeSample&, const TapeSample&) = default;
};

struct TapeMeta {
  double dt = 0.002;
  int joint_count = static_cast<int>(kJoints);
  int speed_factor = 1;
  std::string source;
  int schema_version = kSchemaVersion;
  friend bool operator==(const TapeMeta&, const TapeMeta&) = default;
};

struct Tape {
  TapeMeta meta;
  std::vector<TapeSample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  /// size() * dt: the span covered when each sample is held for one step.
  double duration() const { return static_cast<double>(samples.size()) * meta.dt; }
  friend bool operator==(const Tape&, const Tape&) = default;
};

/// Appends a frame stamped t. Throws ConfigError when t is more than dt/2
/// away from step * dt.
void append_sample(Tape& tape, const control::CommandFrame& frame, double t);

/// Keeps every k-th sample, re-indexes and re-stamps at dt, multiplies the
/// velocity commands by k. Angles and torques are copied bit for bit.
Tape speed_up(const Tape& tape, int k);

struct Playback {
  control::CommandFrame frame;
  bool past_end = false;
};

/// Zero-order hold: steps beyond the last sample return the last sample
/// with past_end set. Throws ConfigError on an empty tape or negative step.
Playback sample_at(const Tape& tape, std::int64_t step);

void save_tape(const Tape& tape, std::ostream& out);
void save_tape(const Tape& tape, const std::filesystem::path& path);

/// Throws FormatError naming the offending line.
Tape load_tape(std::istream& in);
Tape load_tape(const std::filesystem::path& path);

/// Shortest round-trip decimal representation used by every text format.
std::string format_double(double x);

/// Parses a full field as a double; throws FormatError on trailing garbage.
double parse_double(std::string_view field, std::size_t line);

}  // namespace retouch::tape
