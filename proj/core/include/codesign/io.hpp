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

#ifndef CODESIGN_IO_HPP_
#define CODESIGN_IO_HPP_

#include <string>
#include <vector>

#include "codesign/design_nlp.hpp"
#include "codesign/energy.hpp"
#include "codesign/simulate.hpp"
#include "codesign/solver.hpp"

namespace codesign {

// One row per knot: t, q(7), v(7), u(4), lambda(4), defect_norm. The final
// state row carries zero controls and forces.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

// Per-knot per-motor power rows (t, motor_id, P_mech, P_joule, P_fric,
// P_elec) plus a totals row with motor_id -1 holding the integrated
// energies; its P_fric column integrates max(P_fric, 0), so the totals row
// partitions the co-design cost exactly.
void write_energy_csv(const std::string& path, const Trajectory& traj,
                      const ActuatorParams& act);

// Simulator export: t, q(7), v(7), u_applied(4), ground forces(4).
void write_tracking_csv(const std::string& path,
                        const std::vector<SimSample>& samples);

void write_result(const std::string& path, const CodesignResult& result);
CodesignResult read_result(const std::string& path);

void write_improvement_report(const std::string& path,
                              const ImprovementReport& report);
ImprovementReport read_improvement_report(const std::string& path);

struct StudyRow {
  int dims = 0;
  std::string method;
  int repeat = 0;
  std::string status = "ok";
  double best_cost = 0.0;
  double time_to_99_s = 0.0;
  int planner_calls = 0;
  int iterations = 0;
  // Structural planner calls per iteration: pop_size for CMA, one nominal
  // plus one per active dimension for the gradient method (line-search
  // calls are tracked separately).
  int calls_per_iteration = 0;
  int linesearch_calls = 0;
  bool converged = false;
  double wall_time_s = 0.0;
};
void write_study_csv(const std::string& path, const std::vector<StudyRow>& rows);

}  // namespace codesign

#endif  // CODESIGN_IO_HPP_
