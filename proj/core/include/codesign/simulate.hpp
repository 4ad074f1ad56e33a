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

#ifndef CODESIGN_SIMULATE_HPP_
#define CODESIGN_SIMULATE_HPP_

#include <vector>

#include "codesign/design_nlp.hpp"
#include "codesign/dynamics.hpp"
#include "codesign/solver.hpp"

namespace codesign {

// Compliant-ground time stepper used to cross-check planned motions. It
// shares only the model definition with the planner: contacts are
// penalty-based springs with regularized Coulomb friction, not the KKT
// solve.
struct SimConfig {
  double dt = 1e-3;                 // must be <= planner dt / 5
  double ground_stiffness = 1e4;    // N/m
  double ground_damping = 100.0;    // N*s/m
  double tangential_v_reg = 0.01;   // m/s, Coulomb regularization
  double sanity_position = 10.0;    // divergence threshold on |x|, |z|, m
  double sanity_velocity = 1e3;
};

struct SimSample {
  double t = 0.0;
  Vector7d q;
  Vector7d v;
  Eigen::Vector4d u;       // applied (clamped) torques
  Eigen::Vector4d ground;  // [fx fz hx hz]
};

struct TrackingReport {
  bool diverged = false;
  double rms_joint_error = 0.0;  // rad
  double j_cd_sim = 0.0;         // J, energy model on the simulated motion
  double kp = 0.0;
  double kd = 0.0;
  std::vector<double> per_knot_error;  // mean joint error per planner knot
};

// Tracks a planned trajectory with joint-space PD + feed-forward torque,
// references held between knots, torques clamped to the actuator bounds.
// `samples` (optional) receives every integration step for export.
TrackingReport simulate_tracking(const RobotModel& model,
                                 const Trajectory& planned, double kp,
                                 double kd, const SimConfig& config,
                                 std::vector<SimSample>* samples = nullptr);

// 20x20 grid: Kp linearly spaced on [1, 20]; per Kp row, Kd linearly
// spaced on [0.1, Kp/2]. Returns the pair with the smallest rms tracking
// error; diverged cells are excluded and ties break toward smaller Kp,
// then smaller Kd. Throws VerificationError when every cell diverges.
struct GainSearchResult {
  double kp = 0.0;
  double kd = 0.0;
  double rms_error = 0.0;
  int diverged_cells = 0;
};

// The 400 (Kp, Kd) pairs of the verification grid, row-major in Kp.
std::vector<std::pair<double, double>> verification_gain_grid();
GainSearchResult gain_grid_search(const RobotModel& model,
                                  const Trajectory& planned,
                                  const SimConfig& config, int workers = 1);

// Plans both designs, tunes gains independently for each, simulates, and
// compares the planner-predicted and simulated cost improvements.
struct ImprovementReport {
  double j_plan_nominal = 0.0;
  double j_plan_optimized = 0.0;
  double j_sim_nominal = 0.0;
  double j_sim_optimized = 0.0;
  double improvement_plan = 0.0;  // (J_nom - J_opt) / J_nom
  double improvement_sim = 0.0;
  double discrepancy_rel = 0.0;   // |delta_plan - delta_sim| / |delta_plan|
  double discrepancy_pp = 0.0;    // percentage points
  bool same_sign = false;
  bool flagged = false;           // relative discrepancy above 10%
  GainSearchResult gains_nominal;
  GainSearchResult gains_optimized;
};
ImprovementReport verify_improvement(const CodesignProblem& problem,
                                     const DesignVector& rho_nominal,
                                     const DesignVector& rho_optimized,
                                     const SimConfig& config, int workers = 1);

}  // namespace codesign

#endif  // CODESIGN_SIMULATE_HPP_
