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

#include "codesign/design_nlp.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "codesign/energy.hpp"
#include "codesign/errors.hpp"
#include "codesign/parallel.hpp"

namespace codesign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

double box_separation(const DesignVector& rho, DesignParams* gradient) {
  const double dx = rho.x_mb - rho.x_imu;
  const double dz = rho.z_mb - rho.z_imu;
  const double min_dist = kMbBoxRadius + kImuBoxRadius;
  if (gradient != nullptr) {
    gradient->setZero();
    (*gradient)[8] = 2.0 * dx;    // x_imu
    (*gradient)[9] = 2.0 * dz;    // z_imu
    (*gradient)[10] = -2.0 * dx;  // x_mb
    (*gradient)[11] = -2.0 * dz;  // z_mb
  }
  return min_dist * min_dist - (dx * dx + dz * dz);
}

namespace {

// (variable index, extent index): |rho[var]| <= rho[extent] / 2.
constexpr std::pair<int, int> kPlacementPairs[8] = {
    {8, 6}, {10, 6}, {12, 6}, {14, 6},   // x coordinates vs w_b
    {9, 7}, {11, 7}, {13, 7}, {15, 7}};  // z coordinates vs d_b

}  // namespace

Eigen::VectorXd linear_placement_residuals(const DesignVector& rho) {
  const DesignParams p = rho.to_vector();
  Eigen::VectorXd r(16);
  for (int i = 0; i < 8; ++i) {
    const auto [var, extent] = kPlacementPairs[i];
    r[2 * i] = p[var] - 0.5 * p[extent];
    r[2 * i + 1] = -p[var] - 0.5 * p[extent];
  }
  return r;
}

Eigen::MatrixXd linear_placement_jacobian() {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(16, kDesignDim);
  for (int i = 0; i < 8; ++i) {
    const auto [var, extent] = kPlacementPairs[i];
    j(2 * i, var) = 1.0;
    j(2 * i, extent) = -0.5;
    j(2 * i + 1, var) = -1.0;
    j(2 * i + 1, extent) = -0.5;
  }
  return j;
}

Eigen::VectorXd design_constraints(const DesignVector& rho) {
  Eigen::VectorXd c(kNumDesignConstraints);
  c.head<16>() = linear_placement_residuals(rho);
  c[16] = box_separation(rho);
  return c;
}

Eigen::MatrixXd design_constraint_jacobian(const DesignVector& rho) {
  Eigen::MatrixXd j(kNumDesignConstraints, kDesignDim);
  j.topRows<16>() = linear_placement_jacobian();
  DesignParams g;
  box_separation(rho, &g);
  j.row(16) = g.transpose();
  return j;
}

DesignParams fd_scales() {
  DesignParams s = DesignParams::Constant(0.01);  // meters
  s[4] = 0.01;  // motor mass, kg
  s[5] = 0.1;   // gear ratio
  return s;
}

// ---------------------------------------------------------------------------

PlannerObjective::PlannerObjective(const CodesignProblem& problem)
    : problem_(&problem) {}

double PlannerObjective::evaluate(const DesignVector& rho,
                                  const Trajectory* warm,
                                  Trajectory* trajectory_out) const {
  try {
    const auto model = std::make_shared<RobotModel>(
        build_model(rho, problem_->model_config));
    const ShootingProblem sp =
        build_problem(model, problem_->task, problem_->ocp_config);

    std::vector<Eigen::VectorXd> xs;
    std::vector<Eigen::VectorXd> us;
    if (warm != nullptr &&
        static_cast<int>(warm->us.size()) == sp.horizon()) {
      xs = warm->xs;
      us = warm->us;
      xs[0] = sp.x0;
    } else {
      InitialGuess guess = cold_start(sp, *model);
      xs = std::move(guess.xs);
      us = std::move(guess.us);
    }

    TrajectorySolver solver(problem_->solver_settings);
    Trajectory traj = solver.solve(sp, xs, us);
    calls_.fetch_add(1);
    if (!traj.converged) {
      throw EvaluationError("planner did not converge: " + traj.stop_reason);
    }
    const double j = codesign_cost(traj, model->actuator);
    if (trajectory_out != nullptr) *trajectory_out = std::move(traj);
    return j;
  } catch (const InvalidDesignError& e) {
    throw EvaluationError(std::string("invalid design: ") + e.what());
  } catch (const InfeasibleStartError& e) {
    throw EvaluationError(std::string("infeasible start: ") + e.what());
  } catch (const SingularContactError& e) {
    throw EvaluationError(std::string("singular contact: ") + e.what());
  }
}

Evaluation evaluate_design(const CodesignProblem& problem,
                           const DesignVector& rho, const Trajectory* warm) {
  if (!problem.bounds.contains(rho)) {
    throw std::invalid_argument("design outside bounds");
  }
  PlannerObjective objective(problem);
  Evaluation ev;
  ev.j = objective.evaluate(rho, warm, &ev.trajectory);
  return ev;
}

DesignParams fd_gradient(const CodesignProblem& problem,
                         const ObjectiveFunction& objective,
                         const DesignVector& rho, double j_nominal,
                         const Trajectory* warm_source) {
  const DesignParams p = rho.to_vector();
  const DesignParams lo = problem.bounds.lower.to_vector();
  const DesignParams hi = problem.bounds.upper.to_vector();
  const DesignParams scales = fd_scales();
  const int n = static_cast<int>(problem.active_dims.size());

  DesignParams gradient = DesignParams::Zero();
  std::vector<char> ok(static_cast<size_t>(n), 0);
  std::vector<std::string> failures(static_cast<size_t>(n));

  parallel_for(n, problem.workers, [&](int a) {
    const int i = problem.active_dims[static_cast<size_t>(a)];
    double eps = problem.fd_epsilon_rel * scales[i];
    for (int attempt = 0; attempt < 2; ++attempt, eps *= 0.1) {
      // One-sided step; flipped when the upper bound is in the way.
      double step = eps;
      if (p[i] + step > hi[i] && p[i] - eps >= lo[i]) step = -eps;
      DesignParams pp = p;
      pp[i] += step;
      try {
        const double jp = objective.evaluate(DesignVector::from_vector(pp),
                                             warm_source, nullptr);
        gradient[i] = (jp - j_nominal) / step;
        ok[static_cast<size_t>(a)] = 1;
        return;
      } catch (const EvaluationError& e) {
        failures[static_cast<size_t>(a)] = e.what();
      }
    }
  });

  for (int a = 0; a < n; ++a) {
    if (!ok[static_cast<size_t>(a)]) {
      throw GradientError(
          "finite-difference component " +
          DesignVector::component_names()[problem.active_dims[a]] +
          " failed twice: " + failures[static_cast<size_t>(a)]);
    }
  }
  return gradient;
}

// ---------------------------------------------------------------------------

namespace {

// Powell-Hestenes-Rockafellar penalty for inequalities c <= 0.
double al_penalty(const Eigen::VectorXd& c, const Eigen::VectorXd& lam,
                  double mu) {
  double value = 0.0;
  for (int j = 0; j < c.size(); ++j) {
    const double t = lam[j] + mu * c[j];
    if (t > 0.0) {
      value += (t * t - lam[j] * lam[j]) / (2.0 * mu);
    } else {
      value -= lam[j] * lam[j] / (2.0 * mu);
    }
  }
  return value;
}

DesignParams al_penalty_gradient(const DesignVector& rho,
                                 const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& lam, double mu) {
  const Eigen::MatrixXd jac = design_constraint_jacobian(rho);
  DesignParams g = DesignParams::Zero();
  for (int j = 0; j < c.size(); ++j) {
    const double t = lam[j] + mu * c[j];
    if (t > 0.0) g += t * jac.row(j).transpose();
  }
  return g;
}

}  // namespace

CodesignResult solve_codesign(const CodesignProblem& problem,
                              const DesignVector& rho0,
                              const ObjectiveFunction& objective) {
  const auto t0 = std::chrono::steady_clock::now();
  const DesignParams lo = problem.bounds.lower.to_vector();
  const DesignParams hi = problem.bounds.upper.to_vector();
  const DesignParams range = hi - lo;

  if (!problem.bounds.contains(rho0)) {
    throw std::invalid_argument("initial design outside bounds");
  }
  if ((design_constraints(rho0).array() > 0.0).any()) {
    throw std::invalid_argument("initial design violates design constraints");
  }

  CodesignResult result;
  result.method = "gradient";
  result.task_name = problem.task.name;
  result.dims = static_cast<int>(problem.active_dims.size());
  result.rho_initial = rho0;

  auto project = [&](const DesignParams& p) {
    return DesignParams(p.cwiseMax(lo).cwiseMin(hi));
  };
  auto masked = [&](DesignParams g) {
    DesignParams out = DesignParams::Zero();
    for (int i : problem.active_dims) out[i] = g[i];
    return out;
  };

  DesignVector rho = rho0;
  Trajectory traj;
  double j_current = objective.evaluate(rho, nullptr, &traj);
  int planner_calls = 1;
  result.j_initial = j_current;
  double best_j = j_current;
  DesignVector best_rho = rho;
  Trajectory best_traj = traj;

  {
    NlpIterationLog log;
    log.iteration = 0;
    log.j = j_current;
    log.max_violation =
        std::max(0.0, design_constraints(rho).maxCoeff());
    log.calls_nominal = 1;
    log.time_s = elapsed_s(t0);
    log.best_so_far = best_j;
    result.iterations.push_back(log);
  }

  Eigen::VectorXd lam = Eigen::VectorXd::Zero(kNumDesignConstraints);
  double mu = problem.penalty_init;
  double step_scale = 0.0;  // adaptive; initialized from the first gradient
  double prev_outer_violation = kInf;
  double last_pg_norm = kInf;
  bool converged = false;
  std::string stop_reason = "max outer iterations";
  int iteration = 0;

  for (int outer = 0; outer < problem.max_outer && !converged; ++outer) {
    Eigen::VectorXd c = design_constraints(rho);
    const double merit_outer_start = j_current + al_penalty(c, lam, mu);
    double merit_current = merit_outer_start;

    for (int inner = 0; inner < problem.max_inner; ++inner) {
      ++iteration;
      NlpIterationLog log;
      log.iteration = iteration;
      log.outer = outer + 1;

      // Fresh nominal evaluation: warm-start source for the FD fan-out.
      j_current = objective.evaluate(rho, &traj, &traj);
      ++planner_calls;
      log.calls_nominal = 1;
      c = design_constraints(rho);
      merit_current = j_current + al_penalty(c, lam, mu);

      DesignParams grad = fd_gradient(problem, objective, rho, j_current, &traj);
      log.calls_fd = static_cast<int>(problem.active_dims.size());
      planner_calls += log.calls_fd;
      grad += al_penalty_gradient(rho, c, lam, mu);
      grad = masked(grad);

      // Normalized-box (y = (p - lo)/range) coordinates for steps and
      // tolerances: descent direction in p units is grad * range^2.
      const DesignParams p = rho.to_vector();
      const DesignParams dir =
          masked(grad.cwiseProduct(range).cwiseProduct(range));
      const DesignParams pg = p - project(p - dir);
      double pg_norm = 0.0;
      for (int i : problem.active_dims) {
        pg_norm += (pg[i] / range[i]) * (pg[i] / range[i]);
      }
      pg_norm = std::sqrt(pg_norm);
      log.grad_norm_scaled = pg_norm;
      last_pg_norm = pg_norm;

      const double violation_now = std::max(0.0, c.maxCoeff());
      if (pg_norm < problem.grad_tol_scaled &&
          violation_now <= problem.constraint_tol) {
        log.j = j_current;
        log.merit = merit_current;
        log.max_violation = violation_now;
        log.time_s = elapsed_s(t0);
        if (j_current < best_j) {
          best_j = j_current;
          best_rho = rho;
          best_traj = traj;
        }
        log.best_so_far = best_j;
        result.iterations.push_back(log);
        converged = true;
        stop_reason = "projected gradient below tolerance";
        break;
      }
      if (pg_norm < problem.grad_tol_scaled) {
        // Stationary for the current multipliers but not yet feasible:
        // hand control to the outer loop for a multiplier update.
        log.j = j_current;
        log.merit = merit_current;
        log.max_violation = violation_now;
        log.time_s = elapsed_s(t0);
        log.best_so_far = best_j;
        result.iterations.push_back(log);
        break;
      }

      if (step_scale == 0.0) {
        // First step moves the largest normalized component by 0.1.
        step_scale =
            0.1 / std::max(dir.cwiseQuotient(range).cwiseAbs().maxCoeff(),
                           1e-12);
      }

      // Armijo backtracking on the augmented merit along the projection arc.
      // The first trial never moves a normalized component by more than 1/4.
      const double t_cap =
          0.25 / std::max(dir.cwiseQuotient(range).cwiseAbs().maxCoeff(),
                          1e-12);
      double t = std::min(step_scale, t_cap);
      bool accepted = false;
      for (int ls = 0; ls < problem.max_linesearch; ++ls, t *= 0.5) {
        const DesignParams candidate_p = project(p - t * dir);
        const DesignVector candidate =
            DesignVector::from_vector(candidate_p);
        const DesignParams dp = p - candidate_p;
        const double decrease = grad.dot(dp);
        if (dp.cwiseQuotient(range).norm() < 1e-14) break;

        double j_cand;
        Trajectory traj_cand;
        try {
          j_cand = objective.evaluate(candidate, &traj, &traj_cand);
          ++planner_calls;
          ++log.calls_linesearch;
        } catch (const EvaluationError&) {
          ++planner_calls;
          ++log.calls_linesearch;
          continue;
        }
        const double merit_cand =
            j_cand + al_penalty(design_constraints(candidate), lam, mu);
        if (merit_cand <= merit_current - 1e-4 * decrease) {
          rho = candidate;
          j_current = j_cand;
          traj = std::move(traj_cand);
          merit_current = merit_cand;
          log.step_norm_scaled = dp.cwiseQuotient(range).norm();
          accepted = true;
          step_scale = t * 2.0;
          break;
        }
      }

      c = design_constraints(rho);
      log.j = j_current;
      log.merit = merit_current;
      log.max_violation = std::max(0.0, c.maxCoeff());
      log.time_s = elapsed_s(t0);
      if (j_current < best_j && (c.array() <= problem.constraint_tol).all()) {
        best_j = j_current;
        best_rho = rho;
        best_traj = traj;
      }
      log.best_so_far = best_j;
      result.iterations.push_back(log);

      if (!accepted) {
        // No acceptable step at this multiplier setting; hand control back
        // to the outer loop.
        step_scale *= 0.5;
        break;
      }
    }
    if (converged) break;

    // Multiplier and penalty updates.
    c = design_constraints(rho);
    for (int j = 0; j < lam.size(); ++j) {
      lam[j] = std::max(0.0, lam[j] + mu * c[j]);
    }
    const double violation = std::max(0.0, c.maxCoeff());
    if (violation > 0.5 * prev_outer_violation &&
        violation > problem.constraint_tol) {
      mu = std::min(mu * problem.penalty_factor, problem.penalty_max);
    }
    prev_outer_violation = std::max(violation, problem.constraint_tol);

    // A merit stall only counts as convergence when the gradient is small
    // too; a stall with a large gradient is a line-search failure.
    const double outer_improvement = merit_outer_start - merit_current;
    if (std::abs(outer_improvement) <
            problem.merit_tol_rel * std::max(1.0, std::abs(merit_current)) &&
        violation <= problem.constraint_tol &&
        last_pg_norm <= problem.grad_tol_scaled) {
      converged = true;
      stop_reason = "merit improvement below tolerance";
    }
  }

  result.rho_opt = best_rho;
  result.j_final = best_j;
  result.final_trajectory = best_traj;
  result.max_violation =
      std::max(0.0, design_constraints(best_rho).maxCoeff());
  result.converged = converged;
  result.stop_reason = stop_reason;
  result.planner_calls = planner_calls;
  result.wall_time_s = elapsed_s(t0);
  return result;
}

CodesignResult solve_codesign(const CodesignProblem& problem,
                              const DesignVector& rho0) {
  const PlannerObjective objective(problem);
  return solve_codesign(problem, rho0, objective);
}

double convergence_time(const CodesignResult& result) {
  if (result.iterations.empty()) return 0.0;
  const double j0 = result.j_initial;
  const double jf = result.j_final;
  if (!(j0 > jf)) return result.iterations.front().time_s;
  const double threshold = jf + 0.01 * (j0 - jf);
  for (const NlpIterationLog& log : result.iterations) {
    if (log.best_so_far <= threshold) return log.time_s;
  }
  return result.iterations.back().time_s;
}

}  // namespace codesign
