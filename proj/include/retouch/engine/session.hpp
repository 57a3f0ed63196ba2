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

// Live Motion ReTouch over a WebSocket (see docs/protocol.md).
//
// The control loop runs on the thread that calls Session::run(); a network
// thread owns the socket. They talk only through two bounded queues, and
// every inbound message takes effect at a tick boundary.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "retouch/engine/runs.hpp"
#include "retouch/engine/scenario.hpp"
#include "retouch/tape.hpp"

namespace retouch::engine {

inline constexpr int kProtocolVersion = 1;
inline constexpr int kDefaultDecimation = 10;
inline constexpr double kStaleAfter = 0.2;  // s of simulation time

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Editor torque request. Exactly one of joint torque or planar force.
struct InterveneMsg {
  std::optional<JointVec> joint_torque;
  std::optional<model::Vec2> planar_force;
  std::optional<double> t;  // simulation time the client reacted to
  std::optional<std::int64_t> id;
};

enum class ControlAction { kStart, kPause, kResume, kSave, kQuit, kSetAlpha };
const char* to_string(ControlAction a);

struct ControlMsg {
  ControlAction action = ControlAction::kPause;
  double value = 0.0;  // set_alpha
  std::string path;    // save; empty picks the session default
  std::optional<std::int64_t> id;
};

using ClientMessage = std::variant<InterveneMsg, ControlMsg>;

/// Parses and validates one client text frame. Throws ProtocolError with a
/// reason suitable for an `error` reply.
ClientMessage parse_client_message(std::string_view text);

struct SceneInfo {
  model::PegTaskEnv env;
  model::RobotParams params;
  double dt = kControlDt;
  std::int64_t total_steps = 0;
};

struct StateExtras {
  bool paused = false;
  bool done = false;
  int decimation = kDefaultDecimation;
  std::int64_t stale_dropped = 0;
  std::int64_t rejected = 0;
};

/// `state` message for a loop snapshot. The scene block is included when
/// `scene` is given (first message after connecting).
std::string state_message(const LoopSnapshot& s, const model::RobotParams& p,
                          const StateExtras& extras, const SceneInfo* scene = nullptr);

std::string ack_message(std::string_view of, std::optional<std::int64_t> id,
                        std::int64_t step, const std::string& detail_key = {},
                        const std::string& detail = {});
std::string error_message(std::string_view reason, std::optional<std::int64_t> id = {});

struct SessionOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 binds an ephemeral port
  int decimation = kDefaultDecimation;
  double stale_after = kStaleAfter;
  bool realtime = true;
  bool start_paused = false;
  /// Keep serving after the tape ends until the client saves and quits.
  bool linger = true;
  std::filesystem::path save_path = "retouched.csv";
  std::size_t queue_capacity = 256;
};

struct SessionStats {
  std::int64_t snapshots = 0;
  std::int64_t interventions = 0;
  std::int64_t stale_dropped = 0;
  std::int64_t rejected = 0;
  std::int64_t saves = 0;
};

/// `tape` must outlive the session. stats() is meant for after run().
class Session {
 public:
  Session(const tape::Tape& tape, const Scenario& sc, const InterventionProfile& scripted,
          SessionOptions opt = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// Bound port; valid after construction.
  unsigned short port() const;

  /// Runs the loop until the tape ends (and, with linger, a client quits or
  /// disconnects) or a quit arrives. Returns the run up to that point.
  RetouchResult run();

  /// Asks run() to return at the next tick boundary. Thread-safe.
  void stop();

  SessionStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Writes `tape` and, next to it with extension `.int`, the timeline that
/// reproduces it. Returns the timeline path.
std::filesystem::path save_retouch(const tape::Tape& tape, const InterventionProfile& timeline,
                                   const std::filesystem::path& tape_path);

}  // namespace retouch::engine
