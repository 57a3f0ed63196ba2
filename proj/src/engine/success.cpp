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

#include "retouch/engine/success.hpp"

#include <algorithm>
#include <cmath>

namespace retouch::engine {

const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::kNone: return "none";
    case FailureReason::kMissedGrasp: return "missed_grasp";
    case FailureReason::kDropped: return "dropped";
    case FailureReason::kInsertionFailed: return "insertion_failed";
    case FailureReason::kInsertedAtAngleProxy: return "inserted_at_angle_proxy";
  }
  return "?";
}

SuccessReport evaluate_success(const RunLog& log, const model::PegTaskEnv& env) {
  using model::TubeLocation;
  SuccessReport rep;
  bool held = false;
  for (const StepRecord& r : log.steps) {
    if (r.tube.where == TubeLocation::kHeld) held = true;
    const bool over_target = std::abs(r.tube.bottom.x - env.target_hole.x) < env.rack_half_width;
    if (r.contact.tube_held && over_target)
      rep.max_lateral_force = std::max(rep.max_lateral_force, r.contact.lateral_force);
  }
  if (!log.steps.empty()) {
    const model::TubeState& last = log.steps.back().tube;
    rep.final_location = last.where;
    if (last.where == TubeLocation::kTarget)
      rep.final_depth = std::max(0.0, env.target_hole.y - last.bottom.y);
  }

  if (!held) {
    rep.reason = FailureReason::kMissedGrasp;
  } else if (rep.final_location == TubeLocation::kDropped) {
    rep.reason = FailureReason::kDropped;
  } else if (rep.final_location != TubeLocation::kTarget ||
             rep.final_depth < env.insertion_depth_goal) {
    rep.reason = FailureReason::kInsertionFailed;
  } else if (rep.max_lateral_force > env.lateral_force_limit) {
    rep.reason = FailureReason::kInsertedAtAngleProxy;
  } else {
    rep.reason = FailureReason::kNone;
  }
  rep.success = rep.reason == FailureReason::kNone;
  return rep;
}

}  // namespace retouch::engine
