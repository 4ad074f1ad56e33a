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

#ifndef CODESIGN_DESIGN_HPP_
#define CODESIGN_DESIGN_HPP_

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "codesign/energy.hpp"

namespace codesign {

inline constexpr int kDesignDim = 16;
using DesignParams = Eigen::Matrix<double, kDesignDim, 1>;

// The 16 continuous design parameters: leg segment lengths, actuator sizing,
// base shape, payload-box centers and leg attachment points. All positions
// are expressed in the base frame (origin at the geometric center of the
// base rectangle, x along the motion direction, z up).
struct DesignVector {
  // Upper/lower leg segment lengths, front and hind (m).
  double l_uf = 0.16;
  double l_lf = 0.16;
  double l_uh = 0.16;
  double l_lh = 0.16;
  // Shared motor mass (kg) and gear ratio.
  double m_m = 0.053;
  double n_gear = 9.0;
  // Base width (along x) and depth (along z), m.
  double w_b = 0.36;
  double d_b = 0.08;
  // Electronics-box centers (m): IMU box and motherboard box.
  double x_imu = 0.04;
  double z_imu = 0.01;
  double x_mb = -0.05;
  double z_mb = -0.01;
  // Leg attachment (shoulder) points (m), front and hind.
  double x_fr = 0.15;
  double z_fr = -0.02;
  double x_hr = -0.15;
  double z_hr = -0.02;

  // Canonical component order used everywhere a design appears as a plain
  // vector (files, bounds, finite differences, dimension subsets):
  //   [l_uf l_lf l_uh l_lh m_m n_gear w_b d_b
  //    x_imu z_imu x_mb z_mb x_fr z_fr x_hr z_hr]
  DesignParams to_vector() const;
  static DesignVector from_vector(const DesignParams& p);

  static const std::array<std::string, kDesignDim>& component_names();
};

// Componentwise box bounds on the design vector.
struct DesignBounds {
  DesignVector lower;
  DesignVector upper;

  bool contains(const DesignVector& rho, double tol = 0.0) const;
  // Defaults that hold the stock design strictly inside.
  static DesignBounds defaults();
};

// The nested dimension subsets used in the scalability study. Components
// outside the active set stay frozen at their baseline values.
//   4: leg lengths; 6: + motor mass and gear ratio; 8: + base shape;
//   12: + electronics boxes; 16: full vector.
std::vector<int> active_dims_preset(int dim);

// Fixed (non-optimized) model quantities: reference lengths and masses the
// scaling laws are anchored to, payload masses, ground friction and the
// transmission parameters shared by all motors.
struct BaselineModelConfig {
  double reference_leg_length = 0.16;  // l0 the linear mass scaling refers to
  double upper_leg_mass0 = 0.08;       // kg at l0
  double lower_leg_mass0 = 0.05;       // kg at l0
  double base_structural_mass = 1.799; // kg, uniform rectangle
  double imu_mass = 0.05;              // kg
  double mb_mass = 0.1;                // kg
  double friction_coeff = 0.7;
  double gravity = 9.81;
  // Transmission friction shared by all motors plus the energy-model
  // switches; motor mass and gear ratio come from the design vector.
  double coulomb_friction = 0.01;
  double viscous_friction = 0.001;
  JouleTorque joule_torque = JouleTorque::kTotal;
  MechPower mech_power = MechPower::kOutput;
};

enum class Foot { kFront = 0, kHind = 1 };

struct LegModel {
  Eigen::Vector2d shoulder;  // attachment point, base frame
  double upper_length = 0.0;
  double lower_length = 0.0;
  double upper_mass = 0.0;
  double lower_mass = 0.0;
  double upper_inertia = 0.0;  // rod inertia about COM
  double lower_inertia = 0.0;
  int hip_index = 0;   // generalized-coordinate indices
  int knee_index = 0;
};

// Planar quadruped: floating base (x, z, pitch) plus two 2-segment legs in
// the sagittal plane, 7 DoF total. The base rigid body is the composite of
// the structural rectangle, the two payload boxes and the four motors
// (motors sit at the shoulders, so leg-length changes never move motor
// mass).
struct RobotModel {
  DesignVector design;

  double base_mass = 0.0;            // composite: structure+payloads+motors
  Eigen::Vector2d base_com{0, 0};    // composite COM, base frame
  double base_inertia = 0.0;         // about the composite COM

  LegModel front;
  LegModel hind;

  double total_mass = 0.0;
  double friction_coeff = 0.7;
  double gravity = 9.81;

  ActuatorParams actuator;
  Eigen::Vector4d u_max = Eigen::Vector4d::Zero();  // joint side; u_min = -u_max

  const LegModel& leg(Foot f) const { return f == Foot::kFront ? front : hind; }
};

// Materializes a design vector into a robot model with consistent masses
// and inertias. Leg-segment mass scales linearly with length relative to
// the reference length; joint torque bounds are the motor limit reflected
// through the gearbox. Throws InvalidDesignError for non-positive lengths
// or masses and for non-finite or absurd placements.
RobotModel build_model(const DesignVector& rho, const BaselineModelConfig& cfg);

// Initial configuration: base pitch zero, the shorter leg bent to a 45 deg
// interior knee angle with its foot directly below the shoulder, base
// height chosen so that foot touches the ground, and the other leg solved
// by two-link IK (elbow-backward branch) to reach the ground below its own
// shoulder. Throws InfeasibleStartError when the second leg cannot reach.
Eigen::Matrix<double, 7, 1> initial_configuration(const RobotModel& model);

}  // namespace codesign

#endif  // CODESIGN_DESIGN_HPP_
