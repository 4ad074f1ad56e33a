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

#ifndef CODESIGN_DESIGN_NLP_HPP_
#define CODESIGN_DESIGN_NLP_HPP_

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "codesign/design.hpp"
#include "codesign/ocp.hpp"
#include "codesign/solver.hpp"

namespace codesign {

// Electronics-box separation: c(rho) <= 0 keeps the two box centers at
// least the sum of the circumscribed radii apart. Analytic gradient.
inline constexpr double kImuBoxRadius = 0.0282;  // m
inline constexpr double kMbBoxRadius = 0.0361;   // m
double box_separation(const DesignVector& rho, DesignParams* gradient = nullptr);

// The 16 one-sided placement residuals keeping boxes and shoulders inside
// the base rectangle: +/-x vs w_b/2 and +/-z vs d_b/2. Residual <= 0 means
// feasible. The Jacobian is constant and sparse: +/-1 against the placement
// coordinate, -1/2 against the coupled base extent.
Eigen::VectorXd linear_placement_residuals(const DesignVector& rho);
Eigen::MatrixXd linear_placement_jacobian();

// All inequality constraints stacked: 16 placement rows + box separation.
inline constexpr int kNumDesignConstraints = 17;
Eigen::VectorXd design_constraints(const DesignVector& rho);
Eigen::MatrixXd design_constraint_jacobian(const DesignVector& rho);

// ---------------------------------------------------------------------------

struct CodesignProblem {
  DesignVector baseline;
  DesignBounds bounds = DesignBounds::defaults();
  BaselineModelConfig model_config;
  TaskSpec task;
  OcpConfig ocp_config;
  SolverSettings solver_settings;
  std::vector<int> active_dims = active_dims_preset(16);

  // Finite differences: per-component step = fd_epsilon_rel * scale, where
  // the scale is 0.01 m for lengths/placements, 0.01 kg for the motor mass
  // and 0.1 for the gear ratio.
  double fd_epsilon_rel = 0.1;
  int workers = 1;

  // Augmented-Lagrangian / projected-gradient settings.
  int max_outer = 10;
  int max_inner = 5;
  int max_linesearch = 8;
  double merit_tol_rel = 1e-4;
  double grad_tol_scaled = 1e-4;
  double constraint_tol = 1e-4;
  double penalty_init = 10.0;
  double penalty_factor = 10.0;
  double penalty_max = 1e8;
};

// Per-component finite-difference scales (meters / kilograms / ratio units).
DesignParams fd_scales();

// Objective the upper level differentiates through. The planner-backed
// implementation is thread-safe: concurrent evaluations run on independent
// problem copies.
class ObjectiveFunction {
 public:
  virtual ~ObjectiveFunction() = default;
  // Returns J(rho). `warm` optionally seeds the solve; `trajectory_out`
  // receives the motion when there is one. Throws EvaluationError when the
  // evaluation cannot produce a converged motion.
  virtual double evaluate(const DesignVector& rho, const Trajectory* warm,
                          Trajectory* trajectory_out) const = 0;
};

// Builds the model, start configuration, control bounds and shooting
// problem for rho, solves the task and returns the co-design energy metric.
class PlannerObjective final : public ObjectiveFunction {
 public:
  explicit PlannerObjective(const CodesignProblem& problem);

  double evaluate(const DesignVector& rho, const Trajectory* warm,
                  Trajectory* trajectory_out) const override;

  int planner_calls() const { return calls_.load(); }
  void reset_calls() { calls_.store(0); }

 private:
  const CodesignProblem* problem_;
  mutable std::atomic<int> calls_{0};
};

// Bounds-checked single evaluation (Algorithm "MP" of the upper level).
struct Evaluation {
  double j = 0.0;
  Trajectory trajectory;
};
Evaluation evaluate_design(const CodesignProblem& problem,
                           const DesignVector& rho,
                           const Trajectory* warm = nullptr);

// One-sided forward differences of J through the motion planner, one
// perturbed solve per active dimension, dispatched concurrently and
// gathered in component order. Components at the upper bound step backward
// instead. A failed perturbed solve is retried once with a 10x smaller
// step, then reported as GradientError.
DesignParams fd_gradient(const CodesignProblem& problem,
                         const ObjectiveFunction& objective,
                         const DesignVector& rho, double j_nominal,
                         const Trajectory* warm_source);

struct NlpIterationLog {
  int iteration = 0;       // global inner-iteration index, 1-based
  int outer = 0;
  double j = 0.0;
  double merit = 0.0;
  double max_violation = 0.0;
  double step_norm_scaled = 0.0;
  double grad_norm_scaled = 0.0;
  int calls_nominal = 0;
  int calls_fd = 0;
  int calls_linesearch = 0;
  double time_s = 0.0;     // elapsed wall time when the iterate was accepted
  double best_so_far = 0.0;
};

struct CodesignResult {
  std::string method;
  std::string task_name;
  int dims = 0;
  uint64_t seed = 0;
  DesignVector rho_initial;
  DesignVector rho_opt;
  double j_initial = 0.0;
  double j_final = 0.0;
  double max_violation = 0.0;
  bool converged = false;
  std::string stop_reason;
  int planner_calls = 0;
  double wall_time_s = 0.0;
  std::vector<NlpIterationLog> iterations;
  Trajectory final_trajectory;
};

// Augmented-Lagrangian outer loop over the design inequalities with
// projected-gradient inner steps on the box bounds and an Armijo
// backtracking line search on the augmented merit. Iterates satisfy the
// bounds exactly by projection.
CodesignResult solve_codesign(const CodesignProblem& problem,
                              const DesignVector& rho0,
                              const ObjectiveFunction& objective);
// Convenience overload backed by the planner.
CodesignResult solve_codesign(const CodesignProblem& problem,
                              const DesignVector& rho0);

// Wall time until the best cost closes 99% of the gap between the first
// and final cost; the first evaluation's time when there is no gap.
double convergence_time(const CodesignResult& result);

}  // namespace codesign

#endif  // CODESIGN_DESIGN_NLP_HPP_
