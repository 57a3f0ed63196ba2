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

// The three experiment phases: teaching under bilateral control, motion
// copying from a tape, and Motion ReTouch of a tape with an editor robot.

#include <cstdint>
#include <optional>

#include "retouch/engine/robot.hpp"
#include "retouch/engine/runlog.hpp"
#include "retouch/engine/scenario.hpp"
#include "retouch/engine/success.hpp"
#include "retouch/tape.hpp"

namespace retouch::engine {

struct TeachResult {
  tape::Tape tape;
  RunLog log;
  SuccessReport report;
};

struct CopyResult {
  RunLog log;
  SuccessReport report;
};

struct RetouchResult {
  tape::Tape tape;
  RunLog log;
  SuccessReport report;
  /// Profile that reproduces the run through run_retouch.
  InterventionProfile timeline;
};

/// Leader driven by the scripted hand, follower in the environment, both
/// under four-channel bilateral control. The leader's responses form the tape.
TeachResult run_teach(const Scenario& sc);

/// Replays `tape` on a single follower for its length plus copy_tail.
/// `trial` perturbs only the sensor-noise seed. Throws ConfigError when the
/// tape's dt differs from the scenario's.
CopyResult run_copy(const tape::Tape& tape, const Scenario& sc, int trial = 0);

/// Snapshot of a running retouch loop, taken at tick boundaries.
struct LoopSnapshot {
  std::int64_t step = 0;
  double t = 0.0;
  double alpha = 0.5;
  control::CommandFrame leader;
  model::RobotState follower;
  model::RobotState editor;
  JointVec follower_tau_res_hat;
  JointVec editor_tau_res_hat;
  JointVec intervention;
  model::ContactInfo contact;
  model::TubeState tube;
};

/// Stepwise Motion ReTouch, shared by scripted runs and live sessions.
class RetouchLoop {
 public:
  RetouchLoop(const tape::Tape& tape, const Scenario& sc, const InterventionProfile& profile);

  bool done() const { return step_ >= total_; }
  std::int64_t step() const { return step_; }
  std::int64_t total_steps() const { return total_; }

  /// Runs one control tick. `live` is an extra torque on the editor, held
  /// by the caller; it is clipped and recorded into the timeline whenever it
  /// changes, so the timeline alone reproduces the run.
  void tick(const JointVec& live = {});

  /// Changes alpha from the next tick on and records the change.
  void set_alpha(double alpha);
  double alpha() const;

  LoopSnapshot snapshot() const;

  /// Profile actually applied: the scripted one plus recorded live input.
  const InterventionProfile& timeline() const { return timeline_; }

  /// Retouched tape so far (one sample per completed tick).
  const tape::Tape& recorded() const { return out_tape_; }

  /// Ends the run (early if needed) and evaluates it.
  RetouchResult finish() &&;

 private:
  const tape::Tape& tape_;
  Scenario sc_;
  InterventionProfile timeline_;
  JointVec live_;
  std::int64_t step_ = 0;
  std::int64_t total_ = 0;
  SimRobot follower_;
  SimRobot editor_;
  model::TubeState tube_;
  model::ContactInfo contact_;
  JointVec intervention_;
  control::CommandFrame leader_frame_;
  tape::Tape out_tape_;
  RunLog log_;
};

/// Motion ReTouch over the whole tape with a scripted intervention profile.
RetouchResult run_retouch(const tape::Tape& tape, const Scenario& sc,
                          const InterventionProfile& profile);

}  // namespace retouch::engine
