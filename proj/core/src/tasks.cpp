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

#include "codesign/tasks.hpp"

#include "codesign/errors.hpp"

namespace codesign {

namespace {

TaskSpec make_trot() {
  TaskSpec t;
  t.name = "trot";
  t.dt = 0.01;
  t.step_length = 0.05;
  t.step_height = 0.05;
  t.goal_displacement = 2 * t.step_length;

  const ContactSet both = ContactSet::both();
  const ContactSet hind_only = ContactSet::only(Foot::kHind);
  const ContactSet front_only = ContactSet::only(Foot::kFront);

  t.phases.push_back({both, 37, {}});
  t.phases.push_back(
      {hind_only, 22, {{Foot::kFront, 0.0, t.step_length, t.step_height}}});
  t.phases.push_back({both, 37, {}});
  t.phases.push_back(
      {front_only, 22, {{Foot::kHind, 0.0, t.step_length, t.step_height}}});
  t.phases.push_back({both, 37, {}});
  return t;
}

TaskSpec make_jump() {
  TaskSpec t;
  t.name = "jump";
  t.dt = 0.01;
  t.step_length = 0.1;
  t.step_height = 0.15;
  t.goal_displacement = t.step_length;

  const ContactSet both = ContactSet::both();
  t.phases.push_back({both, 40, {}});
  t.phases.push_back({ContactSet::none(),
                      20,
                      {{Foot::kFront, 0.0, t.step_length, t.step_height},
                       {Foot::kHind, 0.0, t.step_length, t.step_height}}});
  t.phases.push_back({both, 40, {}});
  return t;
}

TaskSpec make_stance() {
  TaskSpec t;
  t.name = "stance";
  t.dt = 0.01;
  t.phases.push_back({ContactSet::both(), 60, {}});
  return t;
}

}  // namespace

TaskSpec task_library(const std::string& name) {
  if (name == "trot") return make_trot();
  if (name == "jump") return make_jump();
  if (name == "stance") return make_stance();
  throw ConfigError("unknown task: " + name +
                    " (expected trot, jump or stance)");
}

}  // namespace codesign
