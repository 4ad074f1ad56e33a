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

#include "codesign/simulate.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "codesign/energy.hpp"
#include "codesign/errors.hpp"
#include "codesign/parallel.hpp"

namespace codesign {

namespace {

// One contact step with the viscous parts treated implicitly: the spring
// and the friction cap come from the current state, the damper and the
// regularized Coulomb slope act on the end-of-step velocity. The foot
// masses are far too light for an explicit treatment of either at
// millisecond steps.
struct ContactStep {
  Vector7d v_next;
  Eigen::Vector4d ground = Eigen::Vector4d::Zero();  // [fx fz hx hz]
};

ContactStep contact_step(const RobotModel& model, const Vector7d& q,
                         const Vector7d& v, const Vector7d& tau, double dt,
                         const SimConfig& cfg) {
  struct FootContact {
    int slot;               // 0 front, 1 hind
    Jacobian2x7 jac;
    double spring;          // explicit spring force, N
    double tangential_gain; // slope-capped regularized Coulomb
    bool normal_active = true;
  };
  std::vector<FootContact> feet;
  for (Foot f : {Foot::kFront, Foot::kHind}) {
    const FootState fs = foot_kinematics(model, q, v, f);
    if (fs.position.y() >= 0.0) continue;
    FootContact c;
    c.slot = static_cast<int>(f);
    c.jac = fs.jacobian;
    c.spring = -cfg.ground_stiffness * fs.position.y();
    const double normal_preview =
        std::max(0.0, c.spring - cfg.ground_damping * fs.velocity.y());
    const double cap = model.friction_coeff * normal_preview;
    // Capping the slope instead of the force keeps friction opposing the
    // end-of-step velocity, so it can only dissipate.
    c.tangential_gain =
        cap / std::max(cfg.tangential_v_reg, std::abs(fs.velocity.x()));
    feet.push_back(c);
  }

  const Matrix7d m = mass_matrix(model, q);
  ContactStep out;
  for (int pass = 0; pass < 3; ++pass) {
    Matrix7d a = m;
    Vector7d rhs = m * v + dt * tau;
    for (const FootContact& c : feet) {
      if (c.normal_active) {
        const auto jz = c.jac.row(1);
        a.noalias() += dt * cfg.ground_damping * jz.transpose() * jz;
        rhs.noalias() += dt * c.spring * jz.transpose();
      }
      if (c.tangential_gain > 0.0) {
        const auto jx = c.jac.row(0);
        a.noalias() += dt * c.tangential_gain * jx.transpose() * jx;
      }
    }
    out.v_next = Eigen::LLT<Matrix7d>(a).solve(rhs);

    // Repair pass: release normals that would have to pull.
    bool consistent = true;
    out.ground.setZero();
    for (FootContact& c : feet) {
      double fn = 0.0;
      if (c.normal_active) {
        fn = c.spring - cfg.ground_damping * c.jac.row(1).dot(out.v_next);
        if (fn < 0.0) {
          c.normal_active = false;
          consistent = false;
          fn = 0.0;
        }
      }
      const double ft =
          -c.tangential_gain * c.jac.row(0).dot(out.v_next);
      out.ground.segment<2>(2 * c.slot) = Eigen::Vector2d(ft, fn);
    }
    if (consistent) break;
  }
  return out;
}

// Knot index active at each simulation step (zero-duration touchdown knots
// never own an interval).
std::vector<int> knot_of_step(const Trajectory& planned, double dt, int steps) {
  std::vector<int> map(static_cast<size_t>(steps));
  const int n = static_cast<int>(planned.us.size());
  int k = 0;
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    while (k + 1 < n && t >= planned.knot_time[k + 1] - 1e-12) ++k;
    while (k < n - 1 && planned.knot_duration[k] == 0.0) ++k;
    map[static_cast<size_t>(s)] = k;
  }
  return map;
}

}  // namespace

TrackingReport simulate_tracking(const RobotModel& model,
                                 const Trajectory& planned, double kp,
                                 double kd, const SimConfig& config,
                                 std::vector<SimSample>* samples) {
  TrackingReport report;
  report.kp = kp;
  report.kd = kd;

  const double duration = planned.knot_time[planned.knot_time.size() - 1];
  const int steps = static_cast<int>(std::round(duration / config.dt));
  const std::vector<int> ref_knot = knot_of_step(planned, config.dt, steps);
  const int n_knots = static_cast<int>(planned.us.size());
  report.per_knot_error.assign(static_cast<size_t>(n_knots), 0.0);
  std::vector<int> knot_samples(static_cast<size_t>(n_knots), 0);

  Vector7d q = planned.xs[0].head<7>();
  Vector7d v = planned.xs[0].tail<7>();

  double error_sq_sum = 0.0;
  long error_count = 0;
  double energy = 0.0;

  for (int s = 0; s < steps; ++s) {
    const int k = ref_knot[static_cast<size_t>(s)];
    const Eigen::Vector4d u_ref = planned.us[static_cast<size_t>(k)];
    const Eigen::Matrix<double, 4, 1> q_ref =
        planned.xs[static_cast<size_t>(k)].segment<4>(3);
    const Eigen::Matrix<double, 4, 1> v_ref =
        planned.xs[static_cast<size_t>(k)].segment<4>(kNumQ + 3);

    Eigen::Vector4d u = u_ref;
    for (int j = 0; j < 4; ++j) {
      u[j] += kp * (q_ref[j] - q[3 + j]) + kd * (v_ref[j] - v[3 + j]);
    }
    u = u.cwiseMax(-model.u_max).cwiseMin(model.u_max);

    Vector7d tau = -nonlinear_effects(model, q, v);
    tau.segment<4>(3) += u;
    const ContactStep step = contact_step(model, q, v, tau, config.dt, config);
    const Eigen::Vector4d ground = step.ground;

    // Semi-implicit Euler, velocity first.
    v = step.v_next;
    q = config_integrate(q, config.dt * v);

    for (int j = 0; j < 4; ++j) {
      const double e = q[3 + j] - q_ref[j];
      error_sq_sum += e * e;
      report.per_knot_error[static_cast<size_t>(k)] += std::abs(e);
    }
    error_count += 4;
    knot_samples[static_cast<size_t>(k)] += 1;

    for (int j = 0; j < 4; ++j) {
      const PowerBreakdown p = power_terms(u[j], v[3 + j], model.actuator);
      energy += (p.electrical + std::max(p.friction, 0.0)) * config.dt;
    }

    if (samples != nullptr) {
      samples->push_back({s * config.dt, q, v, u, ground});
    }

    if (!q.allFinite() || !v.allFinite() ||
        std::abs(q[0]) > config.sanity_position ||
        std::abs(q[1]) > config.sanity_position ||
        v.cwiseAbs().maxCoeff() > config.sanity_velocity) {
      report.diverged = true;
      break;
    }
  }

  for (int k = 0; k < n_knots; ++k) {
    if (knot_samples[static_cast<size_t>(k)] > 0) {
      report.per_knot_error[static_cast<size_t>(k)] /=
          4.0 * knot_samples[static_cast<size_t>(k)];
    }
  }
  report.rms_joint_error =
      error_count > 0 ? std::sqrt(error_sq_sum / error_count) : 0.0;
  report.j_cd_sim = energy;
  return report;
}

std::vector<std::pair<double, double>> verification_gain_grid() {
  constexpr int kGrid = 20;
  std::vector<std::pair<double, double>> grid;
  grid.reserve(kGrid * kGrid);
  for (int pi = 0; pi < kGrid; ++pi) {
    const double kp = 1.0 + (20.0 - 1.0) * pi / (kGrid - 1);
    const double kd_max = kp / 2.0;
    for (int di = 0; di < kGrid; ++di) {
      grid.emplace_back(kp, 0.1 + (kd_max - 0.1) * di / (kGrid - 1));
    }
  }
  return grid;
}

GainSearchResult gain_grid_search(const RobotModel& model,
                                  const Trajectory& planned,
                                  const SimConfig& config, int workers) {
  const std::vector<std::pair<double, double>> grid = verification_gain_grid();
  struct Cell {
    double kp, kd, error;
    bool diverged;
  };
  std::vector<Cell> cells(grid.size());
  parallel_for(static_cast<int>(grid.size()), workers, [&](int idx) {
    const auto [kp, kd] = grid[static_cast<size_t>(idx)];
    const TrackingReport rep =
        simulate_tracking(model, planned, kp, kd, config);
    cells[static_cast<size_t>(idx)] = {kp, kd, rep.rms_joint_error,
                                       rep.diverged};
  });

  GainSearchResult best;
  bool found = false;
  int diverged = 0;
  for (const Cell& cell : cells) {  // fixed order: ties keep smaller kp, kd
    if (cell.diverged) {
      ++diverged;
      continue;
    }
    if (!found || cell.error < best.rms_error) {
      best.kp = cell.kp;
      best.kd = cell.kd;
      best.rms_error = cell.error;
      found = true;
    }
  }
  best.diverged_cells = diverged;
  if (!found) {
    throw VerificationError("all 400 gain-grid simulations diverged");
  }
  return best;
}

ImprovementReport verify_improvement(const CodesignProblem& problem,
                                     const DesignVector& rho_nominal,
                                     const DesignVector& rho_optimized,
                                     const SimConfig& config, int workers) {
  ImprovementReport report;

  const RobotModel model_nom = build_model(rho_nominal, problem.model_config);
  const RobotModel model_opt =
      build_model(rho_optimized, problem.model_config);
  const Evaluation eval_nom = evaluate_design(problem, rho_nominal);
  const Evaluation eval_opt = evaluate_design(problem, rho_optimized);
  report.j_plan_nominal = eval_nom.j;
  report.j_plan_optimized = eval_opt.j;

  // Gains tuned independently per design, so different robot sizes are
  // compared fairly.
  report.gains_nominal =
      gain_grid_search(model_nom, eval_nom.trajectory, config, workers);
  report.gains_optimized =
      gain_grid_search(model_opt, eval_opt.trajectory, config, workers);

  const TrackingReport sim_nom =
      simulate_tracking(model_nom, eval_nom.trajectory, report.gains_nominal.kp,
                        report.gains_nominal.kd, config);
  const TrackingReport sim_opt = simulate_tracking(
      model_opt, eval_opt.trajectory, report.gains_optimized.kp,
      report.gains_optimized.kd, config);
  report.j_sim_nominal = sim_nom.j_cd_sim;
  report.j_sim_optimized = sim_opt.j_cd_sim;

  report.improvement_plan =
      (report.j_plan_nominal - report.j_plan_optimized) /
      report.j_plan_nominal;
  report.improvement_sim =
      (report.j_sim_nominal - report.j_sim_optimized) / report.j_sim_nominal;
  const double diff =
      std::abs(report.improvement_plan - report.improvement_sim);
  report.discrepancy_pp = 100.0 * diff;
  report.discrepancy_rel =
      diff / std::max(std::abs(report.improvement_plan), 1e-12);
  report.same_sign =
      report.improvement_plan * report.improvement_sim >= 0.0;
  report.flagged = report.discrepancy_rel > 0.10;
  return report;
}

}  // namespace codesign
