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

#include "codesign/ocp.hpp"

#include <memory>
#include <random>

#include "codesign/design.hpp"
#include "codesign/solver.hpp"
#include "codesign/tasks.hpp"
#include "doctest.h"

namespace codesign {
namespace {

std::shared_ptr<const RobotModel> baseline_model() {
  return std::make_shared<RobotModel>(
      build_model(DesignVector{}, BaselineModelConfig{}));
}

TEST_CASE("trot problem structure") {
  const auto model = baseline_model();
  const TaskSpec task = task_library("trot");
  CHECK(task.total_knots() == 155);

  const ShootingProblem problem = build_problem(model, task);
  CHECK(problem.horizon() == 155);

  // Touchdown resets exactly at the start of the second and third double
  // supports.
  int impulses = 0;
  for (int k = 0; k < problem.horizon(); ++k) {
    if (dynamic_cast<const ImpulseKnotAction*>(problem.running[k].get())) {
      ++impulses;
      CHECK((k == 59 || k == 118));
    }
  }
  CHECK(impulses == 2);

  // Zero-duration resets: total time is (155 - 2) * dt.
  CHECK(problem.knot_durations().sum() == doctest::Approx(1.53));

  // Control bounds come from the actuator model through the gearbox.
  CHECK(problem.running[0]->u_ub()[0] ==
        doctest::Approx(9.0 * 5.48 * std::pow(0.053, 0.97)));
}

TEST_CASE("jump problem structure") {
  const auto model = baseline_model();
  const TaskSpec task = task_library("jump");
  CHECK(task.total_knots() == 100);
  const ShootingProblem problem = build_problem(model, task);
  CHECK(problem.horizon() == 100);
  // One touchdown, at the start of the landing phase.
  for (int k = 0; k < problem.horizon(); ++k) {
    const bool is_impulse =
        dynamic_cast<const ImpulseKnotAction*>(problem.running[k].get()) !=
        nullptr;
    CHECK(is_impulse == (k == 60));
  }
}

TEST_CASE("quasi-static stance torques balance gravity") {
  const auto model = baseline_model();
  const Vector7d q0 = initial_configuration(*model);
  const Eigen::Vector4d u = quasi_static_torques(*model, q0, ContactSet::both());
  const ContactSolution sol =
      contact_dynamics(*model, q0, Vector7d::Zero(), u, ContactSet::both());
  CHECK(sol.v_dot.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("knot cost gradients match finite differences of the value") {
  const auto model = baseline_model();
  const TaskSpec task = task_library("trot");
  const ShootingProblem problem = build_problem(model, task);
  const RobotStateSpace space;

  std::mt19937 gen(61);
  std::uniform_real_distribution<double> d(-0.05, 0.05);

  // One stance knot, one swing knot (with swing reference), one touchdown.
  for (int k : {5, 70, 59}) {
    const ActionModel& action = *problem.running[k];
    ActionData data(kNumX, action.nu());

    Eigen::VectorXd x = problem.x0;
    for (int i = 0; i < kNumX; ++i) x[i] += d(gen);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(action.nu());
    for (int i = 0; i < action.nu(); ++i) u[i] = 0.5 * d(gen);

    action.calc(data, x, u);
    action.calc_diff(data, x, u);

    auto value_at = [&](const Eigen::VectorXd& xx, const Eigen::VectorXd& uu) {
      ActionData tmp(kNumX, action.nu());
      action.calc(tmp, xx, uu);
      return tmp.cost;
    };
    // Richardson-extrapolated central differences of the value.
    auto fd_x = [&](int i, double h) {
      Eigen::VectorXd dx = Eigen::VectorXd::Zero(kNumX);
      dx[i] = h;
      return (value_at(space.integrate(x, dx), u) -
              value_at(space.integrate(x, -dx), u)) /
             (2.0 * h);
    };
    auto fd_u = [&](int i, double h) {
      Eigen::VectorXd up = u, um = u;
      up[i] += h;
      um[i] -= h;
      return (value_at(x, up) - value_at(x, um)) / (2.0 * h);
    };
    const double gscale = std::max(1.0, data.lx.cwiseAbs().maxCoeff());
    for (int i = 0; i < kNumX; ++i) {
      const double fd = (4.0 * fd_x(i, 5e-6) - fd_x(i, 1e-5)) / 3.0;
      CHECK(std::abs(data.lx[i] - fd) / gscale < 1e-6);
    }
    for (int i = 0; i < action.nu(); ++i) {
      const double fd = (4.0 * fd_u(i, 5e-6) - fd_u(i, 1e-5)) / 3.0;
      CHECK(std::abs(data.lu[i] - fd) / gscale < 1e-6);
    }
  }
}

TEST_CASE("only regularization terms remain at the reference point") {
  const auto model = baseline_model();
  const TaskSpec task = task_library("stance");
  const OcpConfig config;
  const ShootingProblem problem = build_problem(model, task, config);
  // At x0 under gravity compensation: posture, velocity, swing and bound
  // residuals are zero and the contact forces sit inside the cone, so the
  // only cost left is control plus force regularization.
  const Eigen::Vector4d u_qs =
      quasi_static_torques(*model, problem.x0.head<7>(), ContactSet::both());
  ActionData data(kNumX, 4);
  problem.running[0]->calc(data, problem.x0, u_qs);
  double expected = u_qs.cwiseProduct(u_qs).dot(config.weights.u_weights);
  for (int c = 0; c < 2; ++c) {
    expected +=
        config.weights.force_weight_tangential * std::pow(data.force[2 * c], 2);
    expected +=
        config.weights.force_weight_normal * std::pow(data.force[2 * c + 1], 2);
  }
  CHECK(data.cost == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("stance task converges to standing still") {
  const auto model = baseline_model();
  const TaskSpec task = task_library("stance");
  const ShootingProblem problem = build_problem(model, task);
  const InitialGuess guess = cold_start(problem, *model);

  TrajectorySolver solver;
  const Trajectory traj = solver.solve(problem, guess.xs, guess.us);
  CHECK(traj.converged);
  CHECK(traj.gap_norm <= 1e-9);

  // The optimum is the static stance up to a settling transient.
  CHECK(std::abs(traj.xs.back()[0] - problem.x0[0]) < 1e-3);
  double max_v = 0.0;
  for (const auto& x : traj.xs) {
    max_v = std::max(max_v, x.tail<7>().cwiseAbs().maxCoeff());
  }
  CHECK(max_v < 0.2);
  CHECK(traj.xs.back().tail<7>().cwiseAbs().maxCoeff() < 0.1);

  // Final controls agree with the static oracle at the final posture.
  const Vector7d qf = traj.xs.back().head<7>();
  const Eigen::Vector4d u_static =
      quasi_static_torques(*model, qf, ContactSet::both());
  CHECK((traj.us.back() - u_static).cwiseAbs().maxCoeff() < 0.2);

  SUBCASE("warm start from the solution is a fixed point") {
    const Trajectory again = solver.solve(problem, traj.xs, traj.us);
    CHECK(again.converged);
    CHECK(again.iterations <= 1);
    CHECK(std::abs(again.cost - traj.cost) < 1e-12);
  }
}

TEST_CASE("trot solve: feasible, in bounds, inside the cone") {
  const auto model = baseline_model();
  const TaskSpec task = task_library("trot");
  const ShootingProblem problem = build_problem(model, task);
  const InitialGuess guess = cold_start(problem, *model);

  TrajectorySolver solver;
  const Trajectory traj = solver.solve(problem, guess.xs, guess.us);
  CHECK(traj.converged);
  CHECK(traj.gap_norm <= 1e-9);

  const double u_cap = model->u_max[0];
  double worst_cone = 0.0;
  for (int k = 0; k < problem.horizon(); ++k) {
    CHECK(traj.us[k].cwiseAbs().maxCoeff() <= u_cap + 1e-15);
    const auto* knot =
        dynamic_cast<const ContactKnotAction*>(problem.running[k].get());
    if (!knot) continue;
    for (Foot f : {Foot::kFront, Foot::kHind}) {
      if (!knot->contacts().active(f)) continue;
      const int off = f == Foot::kFront ? 0 : 2;
      const double fx = traj.forces[k][off], fz = traj.forces[k][off + 1];
      worst_cone = std::max(worst_cone, std::abs(fx) - 0.7 * fz);
      worst_cone = std::max(worst_cone, -fz);
    }
  }
  CHECK(worst_cone <= 1e-6);

  // The robot actually moves forward.
  CHECK(traj.xs.back()[0] > 0.03);

  // Stance feet do not slide beyond the stabilized discretization level.
  double worst_foot_speed = 0.0;
  for (int k = 0; k < problem.horizon(); ++k) {
    const auto* knot =
        dynamic_cast<const ContactKnotAction*>(problem.running[k].get());
    if (!knot) continue;
    for (Foot f : {Foot::kFront, Foot::kHind}) {
      if (!knot->contacts().active(f)) continue;
      const FootState fs = foot_kinematics(*model, traj.xs[k].head<7>(),
                                           traj.xs[k].tail<7>(), f);
      worst_foot_speed = std::max(worst_foot_speed, fs.velocity.norm());
    }
  }
  CHECK(worst_foot_speed <= 5e-2);
}

}  // namespace
}  // namespace codesign
