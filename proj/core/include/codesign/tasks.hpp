// Copyright 2026 The codesign Authors
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

#ifndef CODESIGN_TASKS_HPP_
#define CODESIGN_TASKS_HPP_

#include <string>

#include "codesign/ocp.hpp"

namespace codesign {

// Gait library. "trot": two alternating 0.05 m steps with 0.05 m step
// height, 22-knot swing and 37-knot double-support phases. "jump": 0.1 m
// forward with a 0.15 m apex, 40-knot take-off/landing around a 20-knot
// flight. "stance": diagnostic null task (stand still). 10 ms knots.
// Throws ConfigError for unknown names.
TaskSpec task_library(const std::string& name);

}  // namespace codesign

#endif  // CODESIGN_TASKS_HPP_
