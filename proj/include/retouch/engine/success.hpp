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

#include <string>

#include "retouch/engine/runlog.hpp"
#include "retouch/model.hpp"

namespace retouch::engine {

enum class FailureReason { kNone, kMissedGrasp, kDropped, kInsertionFailed, kInsertedAtAngleProxy };
const char* to_string(FailureReason r);

struct SuccessReport {
  bool success = false;
  FailureReason reason = FailureReason::kMissedGrasp;
  double max_lateral_force = 0.0;  // N, while the held tube is over the target rack
  double final_depth = 0.0;        // m, tube bottom below the target mouth
  model::TubeLocation final_location = model::TubeLocation::kSource;
};

/// Rules, first match wins: the tube was never held (missed grasp); it came
/// to rest outside both holes (dropped); it did not end seated in the target
/// at the goal depth (insertion failed); the lateral rack force on it over
/// the target exceeded the limit (the stand-in for an angled insertion).
SuccessReport evaluate_success(const RunLog& log, const model::PegTaskEnv& env);

}  // namespace retouch::engine
