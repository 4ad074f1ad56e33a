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

#include "codesign/energy.hpp"

#include <cmath>

#include "codesign/errors.hpp"
#include "codesign/solver.hpp"

namespace codesign {

double torque_limit(double motor_mass) {
  if (motor_mass <= 0.0) {
    throw InvalidDesignError("torque_limit: non-positive motor mass");
  }
  return 5.48 * std::pow(motor_mass, 0.97);
}

double speed_torque_gradient(double motor_mass) {
  if (motor_mass <= 0.0) {
    throw InvalidDesignError("speed_torque_gradient: non-positive motor mass");
  }
  return 0.15 * std::pow(motor_mass, 1.39);
}

MotorTorques motor_torque_and_friction(double u_joint, double v_joint,
                                       const ActuatorParams& act) {
  MotorTorques t;
  t.speed = act.gear_ratio * v_joint;
  const double s = t.speed > 0.0 ? 1.0 : (t.speed < 0.0 ? -1.0 : 0.0);
  t.friction = act.coulomb_friction * s + act.viscous_friction * t.speed;
  t.total = u_joint / act.gear_ratio + t.friction;
  return t;
}

PowerBreakdown power_terms(double u_joint, double v_joint,
                           const ActuatorParams& act) {
  const MotorTorques t = motor_torque_and_friction(u_joint, v_joint, act);
  const double km = speed_torque_gradient(act.motor_mass);

  PowerBreakdown p;
  p.friction = t.friction * t.speed;
  const double joule_tau =
      act.joule_torque == JouleTorque::kTotal ? t.total : t.friction;
  p.joule = joule_tau * joule_tau / km;
  p.mechanical =
      act.mech_power == MechPower::kOutput ? u_joint * v_joint : p.friction;
  p.electrical = std::max(p.mechanical + p.joule, 0.0);
  return p;
}

EnergyBreakdown energy_breakdown(const Eigen::MatrixXd& joint_torques,
                                 const Eigen::MatrixXd& joint_speeds,
                                 const Eigen::VectorXd& knot_durations,
                                 const ActuatorParams& act) {
  const Eigen::Index n = joint_torques.rows();
  EnergyBreakdown out;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double dt = knot_durations[k];
    if (dt == 0.0) continue;
    for (Eigen::Index m = 0; m < joint_torques.cols(); ++m) {
      const PowerBreakdown p =
          power_terms(joint_torques(k, m), joint_speeds(k, m), act);
      out.electrical += p.electrical * dt;
      out.friction_positive += std::max(p.friction, 0.0) * dt;
    }
  }
  return out;
}

EnergyBreakdown energy_breakdown(const Trajectory& traj,
                                 const ActuatorParams& act) {
  const int n = static_cast<int>(traj.us.size());
  Eigen::MatrixXd torques(n, kNumU);
  Eigen::MatrixXd speeds(n, kNumU);
  for (int k = 0; k < n; ++k) {
    torques.row(k) = traj.us[static_cast<size_t>(k)].transpose();
    speeds.row(k) =
        traj.xs[static_cast<size_t>(k)].segment<kNumU>(kNumQ + 3).transpose();
  }
  return energy_breakdown(torques, speeds, traj.knot_duration, act);
}

double codesign_cost(const Eigen::MatrixXd& joint_torques,
                     const Eigen::MatrixXd& joint_speeds,
                     const Eigen::VectorXd& knot_durations,
                     const ActuatorParams& act) {
  const EnergyBreakdown b =
      energy_breakdown(joint_torques, joint_speeds, knot_durations, act);
  return b.electrical + b.friction_positive;
}

double codesign_cost(const Trajectory& traj, const ActuatorParams& act) {
  const int n = static_cast<int>(traj.us.size());
  Eigen::MatrixXd torques(n, kNumU);
  Eigen::MatrixXd speeds(n, kNumU);
  for (int k = 0; k < n; ++k) {
    torques.row(k) = traj.us[static_cast<size_t>(k)].transpose();
    speeds.row(k) =
        traj.xs[static_cast<size_t>(k)].segment<kNumU>(kNumQ + 3).transpose();
  }
  return codesign_cost(torques, speeds, traj.knot_duration, act);
}

}  // namespace codesign
