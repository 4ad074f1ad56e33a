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

#include "codesign/dynamics.hpp"
#include "codesign/errors.hpp"
#include "doctest.h"

namespace codesign {
namespace {

TEST_CASE("baseline mass bookkeeping") {
  const BaselineModelConfig cfg;
  const DesignVector rho;
  const RobotModel m = build_model(rho, cfg);

  const double legs = 2.0 * (cfg.upper_leg_mass0 + cfg.lower_leg_mass0);
  const double expected = cfg.base_structural_mass + legs + 4.0 * rho.m_m +
                          cfg.imu_mass + cfg.mb_mass;
  CHECK(m.total_mass == doctest::Approx(expected).epsilon(1e-15));
  // Stock design weighs in at the reference total.
  CHECK(m.total_mass == doctest::Approx(2.421).epsilon(1e-12));
}

TEST_CASE("leg mass and inertia scale with length") {
  const BaselineModelConfig cfg;
  DesignVector rho;
  const RobotModel base = build_model(rho, cfg);
  rho.l_lf *= 2.0;
  const RobotModel stretched = build_model(rho, cfg);

  CHECK(stretched.front.lower_mass ==
        doctest::Approx(2.0 * base.front.lower_mass).epsilon(1e-15));
  CHECK(stretched.front.lower_inertia ==
        doctest::Approx(8.0 * base.front.lower_inertia).epsilon(1e-15));
  CHECK(stretched.front.upper_mass == base.front.upper_mass);
}

TEST_CASE("torque bound is the motor limit through the gearbox") {
  const BaselineModelConfig cfg;
  DesignVector rho;
  rho.m_m = 1.0;
  const RobotModel m = build_model(rho, cfg);
  CHECK(m.u_max[0] == doctest::Approx(rho.n_gear * 5.48).epsilon(1e-15));
  CHECK(m.u_max.minCoeff() == m.u_max.maxCoeff());
}

TEST_CASE("total mass and torque bound grow with motor mass") {
  const BaselineModelConfig cfg;
  DesignVector rho;
  const RobotModel a = build_model(rho, cfg);
  rho.m_m = 0.08;
  const RobotModel b = build_model(rho, cfg);
  CHECK(b.total_mass > a.total_mass);
  CHECK(b.u_max[0] > a.u_max[0]);
}

TEST_CASE("build_model is deterministic") {
  const BaselineModelConfig cfg;
  DesignVector rho;
  rho.l_uf = 0.2137;
  rho.m_m = 0.0771;
  const RobotModel a = build_model(rho, cfg);
  const RobotModel b = build_model(rho, cfg);
  CHECK(a.total_mass == b.total_mass);
  CHECK(a.base_inertia == b.base_inertia);
  CHECK((a.base_com.array() == b.base_com.array()).all());
  CHECK((a.u_max.array() == b.u_max.array()).all());
}

TEST_CASE("invalid designs are rejected") {
  const BaselineModelConfig cfg;
  DesignVector rho;
  SUBCASE("non-positive length") {
    rho.l_uh = 0.0;
    CHECK_THROWS_AS(build_model(rho, cfg), InvalidDesignError);
  }
  SUBCASE("non-positive motor mass") {
    rho.m_m = -0.01;
    CHECK_THROWS_AS(build_model(rho, cfg), InvalidDesignError);
  }
  SUBCASE("gear ratio below one") {
    rho.n_gear = 0.5;
    CHECK_THROWS_AS(build_model(rho, cfg), InvalidDesignError);
  }
  SUBCASE("absurd placement") {
    rho.x_imu = 1e6;
    CHECK_THROWS_AS(build_model(rho, cfg), InvalidDesignError);
  }
  SUBCASE("non-finite component") {
    rho.w_b = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(build_model(rho, cfg), InvalidDesignError);
  }
}

TEST_CASE("start configuration: symmetric legs") {
  const BaselineModelConfig cfg;
  DesignVector rho;  // all segments 0.16
  const RobotModel m = build_model(rho, cfg);
  const Vector7d q0 = initial_configuration(m);

  // Both legs identical: both knees bent to the 45 deg interior angle.
  const double knee = std::numbers::pi - std::numbers::pi / 4.0;
  CHECK(q0[4] == doctest::Approx(knee).epsilon(1e-12));
  CHECK(q0[6] == doctest::Approx(knee).epsilon(1e-12));
  CHECK(q0[2] == 0.0);

  // Base height is the chain extent plus the shoulder drop.
  const double reach = 0.12245869835682874;  // law of cosines, 45 deg interior
  CHECK(q0[1] == doctest::Approx(reach - rho.z_fr).epsilon(1e-12));

  // Feet on the ground, right below their shoulders.
  for (Foot f : {Foot::kFront, Foot::kHind}) {
    const Eigen::Vector2d p = foot_position(m, q0, f);
    CHECK(std::abs(p.y()) < 1e-12);
    const double shoulder_x = m.leg(f).shoulder.x();
    CHECK(p.x() == doctest::Approx(shoulder_x).epsilon(1e-12));
  }
}

// Bisection on the knee angle against the required reach, as an independent
// check of the closed-form IK.
double knee_by_bisection(double lu, double ll, double reach) {
  auto chain_reach = [&](double knee) {
    return std::sqrt(lu * lu + ll * ll + 2.0 * lu * ll * std::cos(knee));
  };
  double lo = 0.0, hi = std::numbers::pi;  // reach decreases with the angle
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chain_reach(mid) > reach) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

TEST_CASE("start configuration: asymmetric legs") {
  const BaselineModelConfig cfg;
  DesignVector rho;
  rho.l_uf = 0.12;
  rho.l_lf = 0.12;  // front is the short leg
  const RobotModel m = build_model(rho, cfg);
  const Vector7d q0 = initial_configuration(m);

  const double interior = std::numbers::pi - q0[4];
  CHECK(interior == doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-12));

  for (Foot f : {Foot::kFront, Foot::kHind}) {
    const Eigen::Vector2d p = foot_position(m, q0, f);
    CHECK(std::abs(p.y()) < 1e-12);
  }

  // Hind knee agrees with the bisection oracle.
  const double hind_reach = q0[1] + rho.z_hr;
  const double oracle = knee_by_bisection(rho.l_uh, rho.l_lh, hind_reach);
  CHECK(q0[6] == doctest::Approx(oracle).epsilon(1e-10));
  // Elbow-backward branch: knee behind the hip-foot line.
  CHECK(q0[5] < 0.0);
  CHECK(q0[6] > 0.0);
}

TEST_CASE("start configuration: unreachable ground") {
  const BaselineModelConfig cfg;
  DesignVector rho;
  rho.l_uh = 0.08;
  rho.l_lh = 0.08;  // hind is very short -> low base
  rho.l_uf = 0.32;
  rho.l_lf = 0.09;  // front min reach 0.23 exceeds the required reach
  const RobotModel m = build_model(rho, cfg);
  CHECK_THROWS_AS(initial_configuration(m), InfeasibleStartError);
}

TEST_CASE("active dimension presets are nested") {
  const auto d4 = active_dims_preset(4);
  const auto d6 = active_dims_preset(6);
  const auto d16 = active_dims_preset(16);
  CHECK(d4.size() == 4);
  CHECK(d6.size() == 6);
  CHECK(d16.size() == 16);
  CHECK(std::equal(d4.begin(), d4.end(), d6.begin()));
  CHECK_THROWS_AS(active_dims_preset(5), ConfigError);
}

TEST_CASE("bounds hold the stock design strictly inside") {
  const DesignBounds b = DesignBounds::defaults();
  const DesignParams rho = DesignVector{}.to_vector();
  const DesignParams lo = b.lower.to_vector();
  const DesignParams hi = b.upper.to_vector();
  CHECK((rho.array() > lo.array()).all());
  CHECK((rho.array() < hi.array()).all());
}

TEST_CASE("design vector round-trips through its canonical order") {
  DesignVector d;
  d.l_lh = 0.21;
  d.z_hr = -0.035;
  const DesignVector back = DesignVector::from_vector(d.to_vector());
  CHECK((back.to_vector().array() == d.to_vector().array()).all());
}

}  // namespace
}  // namespace codesign
