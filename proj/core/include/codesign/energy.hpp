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

#ifndef CODESIGN_ENERGY_HPP_
#define CODESIGN_ENERGY_HPP_

#include <Eigen/Core>

namespace codesign {

struct Trajectory;  // solver.hpp

// Which torque enters the Joule loss: the total motor torque u/n + tau_f,
// or the transmission friction torque alone.
enum class JouleTorque { kTotal, kFriction };

// Which power is reported as the mechanical term: the joint-side output
// power u*v, or the friction power tau_f*omega_m.
enum class MechPower { kOutput, kFriction };

// Per-motor transmission and sizing parameters. The torque limit and the
// speed-torque gradient are regressions on the motor mass; Coulomb/viscous
// friction act motor-side.
struct ActuatorParams {
  double motor_mass = 0.053;       // kg
  double gear_ratio = 9.0;         // dimensionless, >= 1
  double coulomb_friction = 0.01;  // N*m
  double viscous_friction = 0.001; // N*m*s/rad
  JouleTorque joule_torque = JouleTorque::kTotal;
  MechPower mech_power = MechPower::kOutput;
};

// Instantaneous power decomposition for one motor. electrical is clamped at
// zero: regeneration is discarded.
struct PowerBreakdown {
  double mechanical = 0.0;  // W
  double joule = 0.0;       // W
  double friction = 0.0;    // W
  double electrical = 0.0;  // W, max(mechanical + joule, 0)
};

// Motor-side torque limit, N*m: 5.48 * m^0.97.
double torque_limit(double motor_mass);

// Speed-torque gradient K_m: 0.15 * m^1.39. Small motors have a small K_m,
// which makes their Joule losses large.
double speed_torque_gradient(double motor_mass);

// Total motor torque, friction torque and motor speed for a joint torque
// u and joint speed v: omega_m = n*v, tau_f = tau_mu*sign(omega_m) +
// b*omega_m (sign(0) = 0), tau_t = u/n + tau_f.
struct MotorTorques {
  double total = 0.0;     // N*m, motor side
  double friction = 0.0;  // N*m, motor side
  double speed = 0.0;     // rad/s, motor side
};
MotorTorques motor_torque_and_friction(double u_joint, double v_joint,
                                       const ActuatorParams& act);

// Power decomposition for one motor at a (joint torque, joint speed) point.
PowerBreakdown power_terms(double u_joint, double v_joint,
                           const ActuatorParams& act);

// Integral split of the co-design metric: electrical energy and the
// non-negative friction energy. Their sum is exactly codesign_cost.
struct EnergyBreakdown {
  double electrical = 0.0;         // J
  double friction_positive = 0.0;  // J
  double total() const { return electrical + friction_positive; }
};
EnergyBreakdown energy_breakdown(const Eigen::MatrixXd& joint_torques,
                                 const Eigen::MatrixXd& joint_speeds,
                                 const Eigen::VectorXd& knot_durations,
                                 const ActuatorParams& act);
EnergyBreakdown energy_breakdown(const Trajectory& traj,
                                 const ActuatorParams& act);

// Co-design metric: rectangle-rule integral over the trajectory knots and
// all four motors of electrical power plus non-negative friction power.
// Joules, always >= 0. Zero-duration knots (touchdown resets) contribute
// nothing.
double codesign_cost(const Trajectory& traj, const ActuatorParams& act);

// Low-level variant over explicit knot arrays: joint torques U (n x 4),
// joint velocities V (n x 4) and per-knot durations dt (n).
double codesign_cost(const Eigen::MatrixXd& joint_torques,
                     const Eigen::MatrixXd& joint_speeds,
                     const Eigen::VectorXd& knot_durations,
                     const ActuatorParams& act);

}  // namespace codesign

#endif  // CODESIGN_ENERGY_HPP_
