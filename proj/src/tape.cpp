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

#include "retouch/tape.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "retouch/detail/text.hpp"
#include "retouch/errors.hpp"

namespace retouch::tape {

namespace {

constexpr std::string_view kMagic = "# retouch-tape v";

using detail::split;
using detail::trim;

std::string column_header() {
  std::string h = "step,t";
  for (const char* name : {"q", "dq", "tau"}) {
    for (std::size_t j = 1; j <= kJoints; ++j) h += "," + std::string(name) + std::to_string(j);
  }
  return h;
}

std::int64_t parse_int(std::string_view field, std::size_t line) {
  field = trim(field);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw FormatError("not an integer: '" + std::string(field) + "'", line);
  return v;
}

TapeMeta parse_header(std::string_view line) {
  if (line.substr(0, kMagic.size()) != kMagic)
    throw FormatError("missing '# retouch-tape v<N>' header", 1);
  const auto parts = split(line.substr(kMagic.size()), ',');
  TapeMeta meta;
  meta.schema_version = static_cast<int>(parse_int(parts[0], 1));
  if (meta.schema_version != kSchemaVersion)
    throw FormatError("unsupported tape schema version " + std::to_string(meta.schema_version), 1);
  bool have_dt = false;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string_view kv = trim(parts[i]);
    const std::size_t eq = kv.find('=');
    if (eq == std::string_view::npos) throw FormatError("malformed header field '" + std::string(kv) + "'", 1);
    const std::string_view key = kv.substr(0, eq);
    const std::string_view val = kv.substr(eq + 1);
    if (key == "dt") {
      meta.dt = parse_double(val, 1);
      have_dt = true;
    } else if (key == "factor") {
      meta.speed_factor = static_cast<int>(parse_int(val, 1));
    } else if (key == "source") {
      meta.source = std::string(val);
    } else {
      throw FormatError("unknown header field '" + std::string(key) + "'", 1);
    }
  }
  if (!have_dt) throw FormatError("header lacks dt", 1);
  if (!(meta.dt > 0.0)) throw FormatError("dt must be > 0", 1);
  if (meta.speed_factor < 1) throw FormatError("factor must be >= 1", 1);
  return meta;
}

void check_stamp(const Tape& tape, std::int64_t step, double t) {
  const double expect = static_cast<double>(step) * tape.meta.dt;
  if (!(std::abs(t - expect) <= 0.5 * tape.meta.dt)) {
    std::ostringstream os;
    os << "sample time " << t << " does not match step " << step << " * dt = " << expect;
    throw ConfigError(os.str());
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

double parse_double(std::string_view field, std::size_t line) {
  field = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    throw FormatError("not a number: '" + std::string(field) + "'", line);
  return v;
}

void append_sample(Tape& tape, const control::CommandFrame& frame, double t) {
  const auto step = static_cast<std::int64_t>(tape.samples.size());
  check_stamp(tape, step, t);
  tape.samples.push_back({step, t, frame});
}

Tape speed_up(const Tape& tape, int k) {
  if (k < 1) throw ConfigError("speed_up: factor must be >= 1");
  if (tape.empty()) throw ConfigError("speed_up: empty tape");
  Tape out;
  out.meta = tape.meta;
  out.meta.speed_factor = tape.meta.speed_factor * k;
  out.samples.reserve(tape.size() / static_cast<std::size_t>(k) + 1);
  const double scale = static_cast<double>(k);
  for (const TapeSample& s : tape.samples) {
    if (s.step % k != 0) continue;
    TapeSample n = s;
    n.step = static_cast<std::int64_t>(out.samples.size());
    n.t = static_cast<double>(n.step) * out.meta.dt;
    if (k != 1) n.frame.dq_cmd = scale * s.frame.dq_cmd;
    out.samples.push_back(n);
  }
  return out;
}

Playback sample_at(const Tape& tape, std::int64_t step) {
  if (tape.empty()) throw ConfigError("sample_at: empty tape");
  if (step < 0) throw ConfigError("sample_at: negative step");
  const auto n = static_cast<std::int64_t>(tape.size());
  if (step >= n) return {tape.samples.back().frame, true};
  return {tape.samples[static_cast<std::size_t>(step)].frame, false};
}

void save_tape(const Tape& tape, std::ostream& out) {
  std::string source = tape.meta.source;
  for (char& c : source) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  out << kMagic << tape.meta.schema_version << ", dt=" << format_double(tape.meta.dt)
      << ", factor=" << tape.meta.speed_factor;
  if (!source.empty()) out << ", source=" << source;
  out << '\n' << column_header() << '\n';
  std::string row;
  for (const TapeSample& s : tape.samples) {
    row.clear();
    row += std::to_string(s.step);
    row += ',';
    row += format_double(s.t);
    for (const JointVec* v : {&s.frame.q_cmd, &s.frame.dq_cmd, &s.frame.tau_cmd}) {
      for (double x : v->v) {
        row += ',';
        row += format_double(x);
      }
    }
    row += '\n';
    out << row;
  }
}

void save_tape(const Tape& tape, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write tape: " + path.string());
  save_tape(tape, f);
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

Tape load_tape(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty tape file", 1);
  Tape tape;
  tape.meta = parse_header(trim(line));
  if (!std::getline(in, line) || trim(line) != column_header())
    throw FormatError("expected column header '" + column_header() + "'", 2);

  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const auto fields = split(body, ',');
    if (fields.size() != kColumns) {
      throw FormatError("expected " + std::to_string(kColumns) + " columns, got " +
                            std::to_string(fields.size()),
                        lineno);
    }
    TapeSample s;
    s.step = parse_int(fields[0], lineno);
    if (s.step != static_cast<std::int64_t>(tape.samples.size()))
      throw FormatError("non-monotone step index " + std::to_string(s.step) + ", expected " +
                            std::to_string(tape.samples.size()),
                        lineno);
    s.t = parse_double(fields[1], lineno);
    std::size_t col = 2;
    for (JointVec* v : {&s.frame.q_cmd, &s.frame.dq_cmd, &s.frame.tau_cmd}) {
      for (double& x : v->v) {
        x = parse_double(fields[col++], lineno);
        if (!std::isfinite(x)) throw FormatError("non-finite value", lineno);
      }
    }
    try {
      check_stamp(tape, s.step, s.t);
    } catch (const ConfigError& e) {
      throw FormatError(e.what(), lineno);
    }
    tape.samples.push_back(s);
  }
  return tape;
}

Tape load_tape(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open tape: " + path.string());
  return load_tape(f);
}

}  // namespace retouch::tape
