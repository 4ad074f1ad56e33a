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

#ifndef CODESIGN_SOLVER_HPP_
#define CODESIGN_SOLVER_HPP_

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "codesign/ocp.hpp"

namespace codesign {

// Per-iteration trace record, for logging and debugging.
struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
  double gap_norm = 0.0;
  bool feasible = false;
  bool accepted = false;
  double alpha = 0.0;
  double reg = 0.0;
  double expected = 0.0;
  double actual = 0.0;
};

struct SolverSettings {
  int max_iterations = 300;
  double tol_expected_improvement = 1e-9;
  double tol_cost_change = 1e-9;
  double tol_gap = 1e-9;
  double reg_init = 1e-9;
  double reg_min = 1e-9;
  double reg_max = 1e9;
  double reg_factor = 10.0;
  int num_alphas = 11;  // 1, 1/2, ..., 2^-10
  double accept_fraction = 0.1;    // Goldstein lower bound on improvement
  double accept_negative = 2.0;    // bound while contracting gaps
  double tiny_gradient = 1e-16;
  std::function<void(const IterationRecord&)> on_iteration;
};

// Knot-indexed result of a trajectory solve.
struct Trajectory {
  std::vector<Eigen::VectorXd> xs;            // N+1 states
  std::vector<Eigen::VectorXd> us;            // N controls (clamped to bounds)
  std::vector<Eigen::Vector4d> forces;        // N, padded [fx fz hx hz]
  Eigen::VectorXd knot_duration;              // N (0 at touchdown resets)
  Eigen::VectorXd knot_time;                  // N+1 cumulative
  Eigen::VectorXd defect_norms;               // N+1; entry k: gap created by knot k
  double cost = 0.0;
  bool converged = false;
  int iterations = 0;
  double gap_norm = 0.0;                      // max over knots at return
  double expected_improvement = 0.0;
  std::string stop_reason;
};

// Feasibility-driven DDP with hard control bounds: Riccati sweeps with
// per-knot projected-Newton box QPs, nonlinear rollouts that contract
// dynamics gaps by (1 - alpha) while the iterate is infeasible, a
// Goldstein-style acceptance test and a Levenberg-style regularization
// schedule. Deterministic: no internal parallelism or global state.
class TrajectorySolver {
 public:
  explicit TrajectorySolver(SolverSettings settings = {});

  Trajectory solve(const ShootingProblem& problem,
                   const std::vector<Eigen::VectorXd>& xs_init,
                   const std::vector<Eigen::VectorXd>& us_init);
  Trajectory solve(const ShootingProblem& problem);  // cold start from x0

  const SolverSettings& settings() const { return settings_; }

 private:
  struct Workspace;
  bool backward_pass(const ShootingProblem& problem, Workspace& ws,
                     double reg) const;
  // Rollout at a given step length; returns false when dynamics fail.
  bool forward_pass(const ShootingProblem& problem, Workspace& ws,
                    double alpha) const;

  SolverSettings settings_;
};

}  // namespace codesign

#endif  // CODESIGN_SOLVER_HPP_
