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

#include "codesign/design.hpp"

#include <cmath>
#include <numbers>

#include "codesign/errors.hpp"

namespace codesign {

namespace {

constexpr double kMaxPlacement = 100.0;  // m, sanity limit on any coordinate

// Interior knee angle of the shortest leg in the start configuration.
constexpr double kStartInteriorKneeAngle = std::numbers::pi / 4.0;

double rod_inertia(double mass, double length) {
  return mass * length * length / 12.0;
}

}  // namespace

DesignParams DesignVector::to_vector() const {
  DesignParams p;
  p << l_uf, l_lf, l_uh, l_lh, m_m, n_gear, w_b, d_b, x_imu, z_imu, x_mb, z_mb,
      x_fr, z_fr, x_hr, z_hr;
  return p;
}

DesignVector DesignVector::from_vector(const DesignParams& p) {
  DesignVector d;
  d.l_uf = p[0];
  d.l_lf = p[1];
  d.l_uh = p[2];
  d.l_lh = p[3];
  d.m_m = p[4];
  d.n_gear = p[5];
  d.w_b = p[6];
  d.d_b = p[7];
  d.x_imu = p[8];
  d.z_imu = p[9];
  d.x_mb = p[10];
  d.z_mb = p[11];
  d.x_fr = p[12];
  d.z_fr = p[13];
  d.x_hr = p[14];
  d.z_hr = p[15];
  return d;
}

const std::array<std::string, kDesignDim>& DesignVector::component_names() {
  static const std::array<std::string, kDesignDim> names = {
      "l_uf", "l_lf", "l_uh", "l_lh", "m_m",  "n_gear", "w_b",  "d_b",
      "x_imu", "z_imu", "x_mb", "z_mb", "x_fr", "z_fr",  "x_hr", "z_hr"};
  return names;
}

bool DesignBounds::contains(const DesignVector& rho, double tol) const {
  const DesignParams p = rho.to_vector();
  const DesignParams lo = lower.to_vector();
  const DesignParams hi = upper.to_vector();
  return (p.array() >= lo.array() - tol).all() &&
         (p.array() <= hi.array() + tol).all();
}

DesignBounds DesignBounds::defaults() {
  DesignBounds b;
  DesignParams lo, hi;
  //    l_uf  l_lf  l_uh  l_lh  m_m   n     w_b  d_b   x_i   z_i    x_mb  z_mb   x_fr  z_fr   x_hr  z_hr
  lo << 0.08, 0.08, 0.08, 0.08, 0.02, 3.0, 0.20, 0.04, -0.20, -0.08, -0.20, -0.08, 0.02, -0.06, -0.30, -0.06;
  hi << 0.32, 0.32, 0.32, 0.32, 0.30, 25.0, 0.50, 0.20, 0.20, 0.08, 0.20, 0.08, 0.30, 0.06, -0.02, 0.06;
  b.lower = DesignVector::from_vector(lo);
  b.upper = DesignVector::from_vector(hi);
  return b;
}

std::vector<int> active_dims_preset(int dim) {
  switch (dim) {
    case 4:
      return {0, 1, 2, 3};
    case 6:
      return {0, 1, 2, 3, 4, 5};
    case 8:
      return {0, 1, 2, 3, 4, 5, 6, 7};
    case 12:
      return {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    case 16:
      return {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
    default:
      throw ConfigError("unknown active-dims preset: " + std::to_string(dim) +
                        " (expected 4, 6, 8, 12 or 16)");
  }
}

RobotModel build_model(const DesignVector& rho, const BaselineModelConfig& cfg) {
  const DesignParams p = rho.to_vector();
  if (!p.allFinite()) throw InvalidDesignError("non-finite design component");
  for (double len : {rho.l_uf, rho.l_lf, rho.l_uh, rho.l_lh, rho.w_b, rho.d_b}) {
    if (len <= 0.0) throw InvalidDesignError("non-positive length in design");
  }
  if (rho.m_m <= 0.0) throw InvalidDesignError("non-positive motor mass");
  if (rho.n_gear < 1.0) throw InvalidDesignError("gear ratio below 1");
  if (cfg.base_structural_mass <= 0.0 || cfg.upper_leg_mass0 <= 0.0 ||
      cfg.lower_leg_mass0 <= 0.0 || cfg.reference_leg_length <= 0.0) {
    throw InvalidDesignError("non-positive baseline mass or length");
  }
  for (double c : {rho.x_imu, rho.z_imu, rho.x_mb, rho.z_mb, rho.x_fr, rho.z_fr,
                   rho.x_hr, rho.z_hr}) {
    if (std::abs(c) > kMaxPlacement) {
      throw InvalidDesignError("placement outside representable range");
    }
  }

  RobotModel m;
  m.design = rho;
  m.friction_coeff = cfg.friction_coeff;
  m.gravity = cfg.gravity;

  auto make_leg = [&](double lu, double ll, const Eigen::Vector2d& shoulder,
                      int hip, int knee) {
    LegModel leg;
    leg.shoulder = shoulder;
    leg.upper_length = lu;
    leg.lower_length = ll;
    // Volume (and thus mass) scales linearly with the segment length.
    leg.upper_mass = cfg.upper_leg_mass0 * lu / cfg.reference_leg_length;
    leg.lower_mass = cfg.lower_leg_mass0 * ll / cfg.reference_leg_length;
    leg.upper_inertia = rod_inertia(leg.upper_mass, lu);
    leg.lower_inertia = rod_inertia(leg.lower_mass, ll);
    leg.hip_index = hip;
    leg.knee_index = knee;
    return leg;
  };
  m.front = make_leg(rho.l_uf, rho.l_lf, {rho.x_fr, rho.z_fr}, 3, 4);
  m.hind = make_leg(rho.l_uh, rho.l_lh, {rho.x_hr, rho.z_hr}, 5, 6);

  // Composite base: structural rectangle + payload boxes + the four motors
  // as point masses at the shoulders (hip and knee actuation co-located).
  struct PointMass {
    double mass;
    Eigen::Vector2d pos;
  };
  const PointMass points[] = {
      {cfg.imu_mass, {rho.x_imu, rho.z_imu}},
      {cfg.mb_mass, {rho.x_mb, rho.z_mb}},
      {2.0 * rho.m_m, {rho.x_fr, rho.z_fr}},
      {2.0 * rho.m_m, {rho.x_hr, rho.z_hr}},
  };
  m.base_mass = cfg.base_structural_mass;
  Eigen::Vector2d weighted = Eigen::Vector2d::Zero();  // structure sits at origin
  for (const auto& pt : points) {
    m.base_mass += pt.mass;
    weighted += pt.mass * pt.pos;
  }
  m.base_com = weighted / m.base_mass;
  m.base_inertia = cfg.base_structural_mass *
                       (rho.w_b * rho.w_b + rho.d_b * rho.d_b) / 12.0 +
                   cfg.base_structural_mass * m.base_com.squaredNorm();
  for (const auto& pt : points) {
    m.base_inertia += pt.mass * (pt.pos - m.base_com).squaredNorm();
  }

  m.total_mass = m.base_mass + m.front.upper_mass + m.front.lower_mass +
                 m.hind.upper_mass + m.hind.lower_mass;

  m.actuator.motor_mass = rho.m_m;
  m.actuator.gear_ratio = rho.n_gear;
  m.actuator.coulomb_friction = cfg.coulomb_friction;
  m.actuator.viscous_friction = cfg.viscous_friction;
  m.actuator.joule_torque = cfg.joule_torque;
  m.actuator.mech_power = cfg.mech_power;
  m.u_max.setConstant(rho.n_gear * torque_limit(rho.m_m));

  return m;
}

namespace {

// Two-link IK for a foot directly below the shoulder at distance `reach`,
// elbow-backward branch: knee angle non-negative, upper leg tilted
// backwards. Returns (hip, knee) or throws.
std::pair<double, double> leg_ik(double lu, double ll, double reach) {
  const double c = (reach * reach - lu * lu - ll * ll) / (2.0 * lu * ll);
  if (c < -1.0 - 1e-12 || c > 1.0 + 1e-12) {
    throw InfeasibleStartError(
        "start configuration out of reach: required " + std::to_string(reach) +
        " m for segments " + std::to_string(lu) + " + " + std::to_string(ll));
  }
  const double knee = std::acos(std::clamp(c, -1.0, 1.0));
  const double hip = -std::atan2(ll * std::sin(knee), lu + ll * std::cos(knee));
  return {hip, knee};
}

}  // namespace

Eigen::Matrix<double, 7, 1> initial_configuration(const RobotModel& model) {
  const double front_total = model.front.upper_length + model.front.lower_length;
  const double hind_total = model.hind.upper_length + model.hind.lower_length;
  // Ties go to the front leg so the result is deterministic.
  const bool front_is_short = front_total <= hind_total;
  const LegModel& short_leg = front_is_short ? model.front : model.hind;
  const LegModel& long_leg = front_is_short ? model.hind : model.front;

  // Shortest leg: interior knee angle fixed, foot right below the shoulder.
  const double knee_s = std::numbers::pi - kStartInteriorKneeAngle;
  const double lu = short_leg.upper_length;
  const double ll = short_leg.lower_length;
  const double reach_s =
      std::sqrt(lu * lu + ll * ll + 2.0 * lu * ll * std::cos(knee_s));
  const double hip_s =
      -std::atan2(ll * std::sin(knee_s), lu + ll * std::cos(knee_s));

  const double base_height = reach_s - short_leg.shoulder.y();
  if (base_height <= 0.0) {
    throw InfeasibleStartError("start configuration puts the base underground");
  }

  const double reach_l = base_height + long_leg.shoulder.y();
  if (reach_l <= 0.0) {
    throw InfeasibleStartError("other shoulder below the ground at start");
  }
  const auto [hip_l, knee_l] =
      leg_ik(long_leg.upper_length, long_leg.lower_length, reach_l);

  Eigen::Matrix<double, 7, 1> q0;
  q0[0] = 0.0;
  q0[1] = base_height;
  q0[2] = 0.0;
  q0[short_leg.hip_index] = hip_s;
  q0[short_leg.knee_index] = knee_s;
  q0[long_leg.hip_index] = hip_l;
  q0[long_leg.knee_index] = knee_l;
  return q0;
}

}  // namespace codesign
