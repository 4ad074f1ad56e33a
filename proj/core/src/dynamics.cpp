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

#include "codesign/dynamics.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "codesign/errors.hpp"

namespace codesign {

namespace {

constexpr int kBase = 0, kFrontUpper = 1, kFrontLower = 2, kHindUpper = 3,
              kHindLower = 4;

inline Eigen::Vector2d rot90(const Eigen::Vector2d& v) {
  return {-v.y(), v.x()};
}

inline Eigen::Vector2d rotate(double c, double s, const Eigen::Vector2d& u) {
  return {c * u.x() - s * u.y(), s * u.x() + c * u.y()};
}

struct BodyFrame {
  double mass = 0.0;
  double inertia = 0.0;
  double omega = 0.0;          // angular rate
  Eigen::Vector2d com;         // COM position, world
  Eigen::Vector2d bias;        // Jdot * v at the COM
  Jacobian2x7 jac;             // d com / d q
  Vector7d w = Vector7d::Zero();  // angular selector: omega = w . v
};

struct Kinematics {
  BodyFrame body[5];
  Eigen::Vector2d foot[2];
  Eigen::Vector2d foot_vel[2];
  Jacobian2x7 foot_jac[2];
  Eigen::Vector2d foot_bias[2];
};

// Positions, COM Jacobians and velocity-product (Jdot v) terms for every
// body and foot. Each point is base + R(pitch) offset + sum of leg-segment
// vectors, so columns and bias terms fall out of rotating unit vectors.
void compute_kinematics(const RobotModel& model, const Vector7d& q,
                        const Vector7d& v, Kinematics& k) {
  const Eigen::Vector2d base_pos(q[0], q[1]);
  const double th = q[2];
  const double cth = std::cos(th), sth = std::sin(th);
  const double vth = v[2];

  // Base composite body.
  {
    BodyFrame& b = k.body[kBase];
    b.mass = model.base_mass;
    b.inertia = model.base_inertia;
    const Eigen::Vector2d arm = rotate(cth, sth, model.base_com);
    b.com = base_pos + arm;
    b.jac.setZero();
    b.jac(0, 0) = 1.0;
    b.jac(1, 1) = 1.0;
    b.jac.col(2) = rot90(arm);
    b.bias = -vth * vth * arm;
    b.w[2] = 1.0;
    b.omega = vth;
  }

  for (Foot f : {Foot::kFront, Foot::kHind}) {
    const LegModel& leg = model.leg(f);
    const int ih = leg.hip_index;
    const int ik = leg.knee_index;
    const double a1 = th + q[ih];
    const double a2 = a1 + q[ik];
    const double w1 = vth + v[ih];
    const double w2 = w1 + v[ik];
    const Eigen::Vector2d d1(std::sin(a1), -std::cos(a1));
    const Eigen::Vector2d d2(std::sin(a2), -std::cos(a2));
    const Eigen::Vector2d e1 = rot90(d1);
    const Eigen::Vector2d e2 = rot90(d2);

    const Eigen::Vector2d shoulder_arm = rotate(cth, sth, leg.shoulder);
    const Eigen::Vector2d shoulder = base_pos + shoulder_arm;
    const Eigen::Vector2d shoulder_col = rot90(shoulder_arm);
    const Eigen::Vector2d shoulder_bias = -vth * vth * shoulder_arm;
    const double lu = leg.upper_length;
    const double ll = leg.lower_length;

    BodyFrame& up = k.body[f == Foot::kFront ? kFrontUpper : kHindUpper];
    up.mass = leg.upper_mass;
    up.inertia = leg.upper_inertia;
    up.com = shoulder + 0.5 * lu * d1;
    up.jac.setZero();
    up.jac(0, 0) = 1.0;
    up.jac(1, 1) = 1.0;
    up.jac.col(2) = shoulder_col + 0.5 * lu * e1;
    up.jac.col(ih) = 0.5 * lu * e1;
    up.bias = shoulder_bias - 0.5 * lu * w1 * w1 * d1;
    up.w[2] = 1.0;
    up.w[ih] = 1.0;
    up.omega = w1;

    BodyFrame& lo = k.body[f == Foot::kFront ? kFrontLower : kHindLower];
    lo.mass = leg.lower_mass;
    lo.inertia = leg.lower_inertia;
    const Eigen::Vector2d knee = shoulder + lu * d1;
    lo.com = knee + 0.5 * ll * d2;
    lo.jac.setZero();
    lo.jac(0, 0) = 1.0;
    lo.jac(1, 1) = 1.0;
    lo.jac.col(2) = shoulder_col + lu * e1 + 0.5 * ll * e2;
    lo.jac.col(ih) = lu * e1 + 0.5 * ll * e2;
    lo.jac.col(ik) = 0.5 * ll * e2;
    lo.bias = shoulder_bias - lu * w1 * w1 * d1 - 0.5 * ll * w2 * w2 * d2;
    lo.w[2] = 1.0;
    lo.w[ih] = 1.0;
    lo.w[ik] = 1.0;
    lo.omega = w2;

    const int fi = static_cast<int>(f);
    k.foot[fi] = knee + ll * d2;
    Jacobian2x7& fj = k.foot_jac[fi];
    fj.setZero();
    fj(0, 0) = 1.0;
    fj(1, 1) = 1.0;
    fj.col(2) = shoulder_col + lu * e1 + ll * e2;
    fj.col(ih) = lu * e1 + ll * e2;
    fj.col(ik) = ll * e2;
    k.foot_bias[fi] = shoulder_bias - lu * w1 * w1 * d1 - ll * w2 * w2 * d2;
    k.foot_vel[fi] = fj * v;
  }
}

Matrix7d assemble_mass_matrix(const Kinematics& k) {
  Matrix7d m = Matrix7d::Zero();
  for (const BodyFrame& b : k.body) {
    m.noalias() += b.mass * b.jac.transpose() * b.jac;
    m.noalias() += b.inertia * b.w * b.w.transpose();
  }
  return m;
}

Vector7d assemble_bias(const RobotModel& model, const Kinematics& k) {
  Vector7d h = Vector7d::Zero();
  for (const BodyFrame& b : k.body) {
    h.noalias() += b.mass * b.jac.transpose() * b.bias;
    h.noalias() += model.gravity * b.mass * b.jac.row(1).transpose();
  }
  return h;
}

Vector7d applied_generalized_force(const Eigen::Vector4d& u) {
  Vector7d tau = Vector7d::Zero();
  tau.segment<4>(3) = u;
  return tau;
}

struct ContactBlock {
  int rows = 0;
  ContactJacobian jac;
  ContactVector stabilized_rhs;  // -(Jdot v + 2a Jv + a^2 phi)
};

ContactBlock contact_block(const Kinematics& k, const ContactSet& contacts,
                           double alpha) {
  ContactBlock blk;
  blk.rows = 2 * contacts.count();
  blk.jac.resize(blk.rows, 7);
  blk.stabilized_rhs.resize(blk.rows);
  int r = 0;
  for (Foot f : {Foot::kFront, Foot::kHind}) {
    if (!contacts.active(f)) continue;
    const int fi = static_cast<int>(f);
    blk.jac.block<2, 7>(r, 0) = k.foot_jac[fi];
    // Position drift is only defined normal to the ground.
    const Eigen::Vector2d drift(0.0, k.foot[fi].y());
    const Eigen::Vector2d rhs = -(k.foot_bias[fi] +
                                  2.0 * alpha * k.foot_vel[fi] +
                                  alpha * alpha * drift);
    blk.stabilized_rhs.segment<2>(r) = rhs;
    r += 2;
  }
  return blk;
}

}  // namespace

double wrap_angle(double a) {
  double w = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (w <= 0.0) w += 2.0 * std::numbers::pi;
  return w - std::numbers::pi;
}

Vector7d config_difference(const Vector7d& q0, const Vector7d& q1) {
  Vector7d d = q1 - q0;
  for (int i = 2; i < 7; ++i) d[i] = wrap_angle(d[i]);
  return d;
}

Vector7d config_integrate(const Vector7d& q, const Vector7d& dq) {
  Vector7d out = q + dq;
  for (int i = 2; i < 7; ++i) out[i] = wrap_angle(out[i]);
  return out;
}

FootState foot_kinematics(const RobotModel& model, const Vector7d& q,
                          const Vector7d& v, Foot foot) {
  Kinematics k;
  compute_kinematics(model, q, v, k);
  const int fi = static_cast<int>(foot);
  FootState fs;
  fs.position = k.foot[fi];
  fs.velocity = k.foot_vel[fi];
  fs.jacobian = k.foot_jac[fi];
  fs.bias_acceleration = k.foot_bias[fi];
  return fs;
}

Eigen::Vector2d foot_position(const RobotModel& model, const Vector7d& q,
                              Foot foot) {
  return foot_kinematics(model, q, Vector7d::Zero(), foot).position;
}

Matrix7d mass_matrix(const RobotModel& model, const Vector7d& q) {
  Kinematics k;
  compute_kinematics(model, q, Vector7d::Zero(), k);
  return assemble_mass_matrix(k);
}

Vector7d nonlinear_effects(const RobotModel& model, const Vector7d& q,
                           const Vector7d& v) {
  Kinematics k;
  compute_kinematics(model, q, v, k);
  return assemble_bias(model, k);
}

ContactSolution contact_dynamics(const RobotModel& model, const Vector7d& q,
                                 const Vector7d& v, const Eigen::Vector4d& u,
                                 const ContactSet& contacts,
                                 double baumgarte_alpha) {
  Kinematics k;
  compute_kinematics(model, q, v, k);
  const Matrix7d m = assemble_mass_matrix(k);
  const Vector7d tau = applied_generalized_force(u) - assemble_bias(model, k);
  const Eigen::LLT<Matrix7d> mllt(m);

  ContactSolution sol;
  if (contacts.count() == 0) {
    sol.v_dot = mllt.solve(tau);
    sol.lambda.resize(0);
    return sol;
  }

  const ContactBlock blk = contact_block(k, contacts, baumgarte_alpha);
  const Eigen::Matrix<double, 7, Eigen::Dynamic, 0, 7, 4> minv_jt =
      mllt.solve(blk.jac.transpose());
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4> schur =
      blk.jac * minv_jt;
  const Eigen::LLT<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>>
      sllt(schur);
  if (sllt.info() != Eigen::Success) {
    throw SingularContactError("rank-deficient contact Jacobian");
  }
  const Vector7d vdot_free = mllt.solve(tau);
  sol.lambda = sllt.solve(blk.stabilized_rhs - blk.jac * vdot_free);
  if (!sol.lambda.allFinite()) {
    throw SingularContactError("contact force solve produced non-finite values");
  }
  sol.v_dot = vdot_free + minv_jt * sol.lambda;
  return sol;
}

ImpulseSolution impulse_dynamics(const RobotModel& model, const Vector7d& q,
                                 const Vector7d& v_minus,
                                 const ContactSet& contacts) {
  ImpulseSolution sol;
  if (contacts.count() == 0) {
    sol.v_plus = v_minus;
    sol.impulse.resize(0);
    return sol;
  }
  Kinematics k;
  compute_kinematics(model, q, v_minus, k);
  const Matrix7d m = assemble_mass_matrix(k);
  const Eigen::LLT<Matrix7d> mllt(m);
  const ContactBlock blk = contact_block(k, contacts, 0.0);
  const Eigen::Matrix<double, 7, Eigen::Dynamic, 0, 7, 4> minv_jt =
      mllt.solve(blk.jac.transpose());
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4> schur =
      blk.jac * minv_jt;
  const Eigen::LLT<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>>
      sllt(schur);
  if (sllt.info() != Eigen::Success) {
    throw SingularContactError("rank-deficient impulse Jacobian");
  }
  sol.impulse = sllt.solve(-blk.jac * v_minus);
  if (!sol.impulse.allFinite()) {
    throw SingularContactError("impulse solve produced non-finite values");
  }
  sol.v_plus = v_minus + minv_jt * sol.impulse;
  return sol;
}

State integrate_step(const Vector7d& q, const Vector7d& v,
                     const Vector7d& v_dot, double dt) {
  State next;
  next.v = v + dt * v_dot;
  next.q = config_integrate(q, dt * next.v);
  return next;
}

namespace {

inline double fd_step(double coord) {
  return 1e-6 * std::max(1.0, std::abs(coord));
}

}  // namespace

DynamicsDerivatives dynamics_derivatives(const RobotModel& model,
                                         const Vector7d& q, const Vector7d& v,
                                         const Eigen::Vector4d& u,
                                         const ContactSet& contacts,
                                         double baumgarte_alpha) {
  DynamicsDerivatives d;
  const int nc = 2 * contacts.count();
  d.dlambda_dq.resize(nc, 7);
  d.dlambda_dv.resize(nc, 7);
  d.dlambda_du.resize(nc, 4);

  auto eval = [&](const Vector7d& qq, const Vector7d& vv,
                  const Eigen::Vector4d& uu) {
    return contact_dynamics(model, qq, vv, uu, contacts, baumgarte_alpha);
  };

  for (int i = 0; i < 7; ++i) {
    const double h = fd_step(q[i]);
    Vector7d qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    const ContactSolution sp = eval(qp, v, u);
    const ContactSolution sm = eval(qm, v, u);
    d.dvdot_dq.col(i) = (sp.v_dot - sm.v_dot) / (2.0 * h);
    if (nc > 0) d.dlambda_dq.col(i) = (sp.lambda - sm.lambda) / (2.0 * h);
  }
  for (int i = 0; i < 7; ++i) {
    const double h = fd_step(v[i]);
    Vector7d vp = v, vm = v;
    vp[i] += h;
    vm[i] -= h;
    const ContactSolution sp = eval(q, vp, u);
    const ContactSolution sm = eval(q, vm, u);
    d.dvdot_dv.col(i) = (sp.v_dot - sm.v_dot) / (2.0 * h);
    if (nc > 0) d.dlambda_dv.col(i) = (sp.lambda - sm.lambda) / (2.0 * h);
  }
  for (int i = 0; i < 4; ++i) {
    const double h = fd_step(u[i]);
    Eigen::Vector4d up = u, um = u;
    up[i] += h;
    um[i] -= h;
    const ContactSolution sp = eval(q, v, up);
    const ContactSolution sm = eval(q, v, um);
    d.dvdot_du.col(i) = (sp.v_dot - sm.v_dot) / (2.0 * h);
    if (nc > 0) d.dlambda_du.col(i) = (sp.lambda - sm.lambda) / (2.0 * h);
  }
  return d;
}

ImpulseDerivatives impulse_derivatives(const RobotModel& model,
                                       const Vector7d& q,
                                       const Vector7d& v_minus,
                                       const ContactSet& contacts) {
  ImpulseDerivatives d;
  const int nc = 2 * contacts.count();
  d.dimpulse_dq.resize(nc, 7);
  d.dimpulse_dv.resize(nc, 7);

  for (int i = 0; i < 7; ++i) {
    const double h = fd_step(q[i]);
    Vector7d qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    const ImpulseSolution sp = impulse_dynamics(model, qp, v_minus, contacts);
    const ImpulseSolution sm = impulse_dynamics(model, qm, v_minus, contacts);
    d.dvplus_dq.col(i) = (sp.v_plus - sm.v_plus) / (2.0 * h);
    if (nc > 0) d.dimpulse_dq.col(i) = (sp.impulse - sm.impulse) / (2.0 * h);
  }
  for (int i = 0; i < 7; ++i) {
    const double h = fd_step(v_minus[i]);
    Vector7d vp = v_minus, vm = v_minus;
    vp[i] += h;
    vm[i] -= h;
    const ImpulseSolution sp = impulse_dynamics(model, q, vp, contacts);
    const ImpulseSolution sm = impulse_dynamics(model, q, vm, contacts);
    d.dvplus_dv.col(i) = (sp.v_plus - sm.v_plus) / (2.0 * h);
    if (nc > 0) d.dimpulse_dv.col(i) = (sp.impulse - sm.impulse) / (2.0 * h);
  }
  return d;
}

double kinetic_energy(const RobotModel& model, const Vector7d& q,
                      const Vector7d& v) {
  Kinematics k;
  compute_kinematics(model, q, v, k);
  double t = 0.0;
  for (const BodyFrame& b : k.body) {
    const Eigen::Vector2d vel = b.jac * v;
    t += 0.5 * b.mass * vel.squaredNorm() + 0.5 * b.inertia * b.omega * b.omega;
  }
  return t;
}

double potential_energy(const RobotModel& model, const Vector7d& q) {
  Kinematics k;
  compute_kinematics(model, q, Vector7d::Zero(), k);
  double pe = 0.0;
  for (const BodyFrame& b : k.body) pe += model.gravity * b.mass * b.com.y();
  return pe;
}

Eigen::Vector2d com_position(const RobotModel& model, const Vector7d& q) {
  Kinematics k;
  compute_kinematics(model, q, Vector7d::Zero(), k);
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const BodyFrame& b : k.body) c += b.mass * b.com;
  return c / model.total_mass;
}

double angular_momentum_about_com(const RobotModel& model, const Vector7d& q,
                                  const Vector7d& v) {
  Kinematics k;
  compute_kinematics(model, q, v, k);
  Eigen::Vector2d com = Eigen::Vector2d::Zero();
  Eigen::Vector2d com_vel = Eigen::Vector2d::Zero();
  for (const BodyFrame& b : k.body) {
    com += b.mass * b.com;
    com_vel += b.mass * (b.jac * v);
  }
  com /= model.total_mass;
  com_vel /= model.total_mass;

  double l = 0.0;
  for (const BodyFrame& b : k.body) {
    const Eigen::Vector2d r = b.com - com;
    const Eigen::Vector2d w = b.jac * v - com_vel;
    l += b.inertia * b.omega + b.mass * (r.x() * w.y() - r.y() * w.x());
  }
  return l;
}

}  // namespace codesign
