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

#ifndef CODESIGN_DYNAMICS_HPP_
#define CODESIGN_DYNAMICS_HPP_

#include <Eigen/Core>

#include "codesign/design.hpp"

namespace codesign {

inline constexpr int kNumQ = 7;   // x, z, pitch, front hip/knee, hind hip/knee
inline constexpr int kNumV = 7;
inline constexpr int kNumU = 4;   // actuated joints; the base is unactuated
inline constexpr int kNumX = kNumQ + kNumV;

using Vector7d = Eigen::Matrix<double, 7, 1>;
using Matrix7d = Eigen::Matrix<double, 7, 7>;
using Matrix74d = Eigen::Matrix<double, 7, 4>;
using Jacobian2x7 = Eigen::Matrix<double, 2, 7>;
// Contact quantities have at most 2 contacts x 2 rows; keep them on the
// stack.
using ContactVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using ContactJacobian = Eigen::Matrix<double, Eigen::Dynamic, 7, 0, 4, 7>;

// (q, v): configuration and generalized velocity. Pitch and joint angles
// live on the circle; x, z are plain reals.
struct State {
  Vector7d q = Vector7d::Zero();
  Vector7d v = Vector7d::Zero();
};

struct ContactSet {
  bool front = false;
  bool hind = false;

  int count() const { return (front ? 1 : 0) + (hind ? 1 : 0); }
  bool active(Foot f) const { return f == Foot::kFront ? front : hind; }
  bool operator==(const ContactSet&) const = default;

  static ContactSet none() { return {false, false}; }
  static ContactSet both() { return {true, true}; }
  static ContactSet only(Foot f) {
    return f == Foot::kFront ? ContactSet{true, false} : ContactSet{false, true};
  }
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

// q1 (-) q0: wraps pitch and joint angles, plain subtraction on x, z.
Vector7d config_difference(const Vector7d& q0, const Vector7d& q1);
// q (+) dq with the same wrap convention.
Vector7d config_integrate(const Vector7d& q, const Vector7d& dq);

struct FootState {
  Eigen::Vector2d position;           // world frame
  Eigen::Vector2d velocity;
  Jacobian2x7 jacobian;               // d position / d q
  Eigen::Vector2d bias_acceleration;  // Jdot * v
};

FootState foot_kinematics(const RobotModel& model, const Vector7d& q,
                          const Vector7d& v, Foot foot);
Eigen::Vector2d foot_position(const RobotModel& model, const Vector7d& q,
                              Foot foot);

// Joint-space inertia, symmetric positive definite.
Matrix7d mass_matrix(const RobotModel& model, const Vector7d& q);

// Coriolis/centrifugal plus gravity generalized forces, so that
// M(q) vdot + h(q, v) = S^T u + Jc^T lambda.
Vector7d nonlinear_effects(const RobotModel& model, const Vector7d& q,
                           const Vector7d& v);

struct ContactSolution {
  Vector7d v_dot = Vector7d::Zero();
  ContactVector lambda;  // (x, z) per active contact, front rows first
};

// Forward dynamics with rigid ground contacts, solved through the contact
// KKT system with Baumgarte stabilization of the contact drift. Throws
// SingularContactError when the contact block loses rank.
ContactSolution contact_dynamics(const RobotModel& model, const Vector7d& q,
                                 const Vector7d& v, const Eigen::Vector4d& u,
                                 const ContactSet& contacts,
                                 double baumgarte_alpha = 50.0);

struct ImpulseSolution {
  Vector7d v_plus = Vector7d::Zero();
  ContactVector impulse;  // N*s, same row layout as contact forces
};

// Perfectly inelastic contact-gain map: M (v+ - v-) = Jc^T Lambda with
// Jc v+ = 0. Kinetic energy never increases.
ImpulseSolution impulse_dynamics(const RobotModel& model, const Vector7d& q,
                                 const Vector7d& v_minus,
                                 const ContactSet& contacts);

// Symplectic Euler: velocity first, then configuration with the new
// velocity; angles wrap into (-pi, pi].
State integrate_step(const Vector7d& q, const Vector7d& v,
                     const Vector7d& v_dot, double dt);

struct DynamicsDerivatives {
  Matrix7d dvdot_dq;
  Matrix7d dvdot_dv;
  Matrix74d dvdot_du;
  Eigen::Matrix<double, Eigen::Dynamic, 7, 0, 4, 7> dlambda_dq;
  Eigen::Matrix<double, Eigen::Dynamic, 7, 0, 4, 7> dlambda_dv;
  Eigen::Matrix<double, Eigen::Dynamic, 4, 0, 4, 4> dlambda_du;
};

// Central finite differences of contact_dynamics with per-coordinate step
// 1e-6 * max(1, |coordinate|).
DynamicsDerivatives dynamics_derivatives(const RobotModel& model,
                                         const Vector7d& q, const Vector7d& v,
                                         const Eigen::Vector4d& u,
                                         const ContactSet& contacts,
                                         double baumgarte_alpha = 50.0);

struct ImpulseDerivatives {
  Matrix7d dvplus_dq;
  Matrix7d dvplus_dv;
  Eigen::Matrix<double, Eigen::Dynamic, 7, 0, 4, 7> dimpulse_dq;
  Eigen::Matrix<double, Eigen::Dynamic, 7, 0, 4, 7> dimpulse_dv;
};

ImpulseDerivatives impulse_derivatives(const RobotModel& model,
                                       const Vector7d& q,
                                       const Vector7d& v_minus,
                                       const ContactSet& contacts);

// Diagnostics used by tests, the simulator and the reporters.
double kinetic_energy(const RobotModel& model, const Vector7d& q,
                      const Vector7d& v);
double potential_energy(const RobotModel& model, const Vector7d& q);
Eigen::Vector2d com_position(const RobotModel& model, const Vector7d& q);
double angular_momentum_about_com(const RobotModel& model, const Vector7d& q,
                                  const Vector7d& v);

}  // namespace codesign

#endif  // CODESIGN_DYNAMICS_HPP_
