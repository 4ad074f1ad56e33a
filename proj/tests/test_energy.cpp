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
#include "doctest.h"

namespace codesign {
namespace {

ActuatorParams stock_actuator() {
  ActuatorParams a;
  a.motor_mass = 0.053;
  a.gear_ratio = 9.0;
  a.coulomb_friction = 0.01;
  a.viscous_friction = 0.001;
  return a;
}

TEST_CASE("regression anchors at unit motor mass") {
  CHECK(torque_limit(1.0) == 5.48);
  CHECK(speed_torque_gradient(1.0) == 0.15);
}

TEST_CASE("regressions at the stock motor mass") {
  CHECK(torque_limit(0.053) == doctest::Approx(0.3171963286578079).epsilon(1e-14));
  CHECK(speed_torque_gradient(0.053) ==
        doctest::Approx(0.0025283355886485024).epsilon(1e-14));
}

TEST_CASE("torque limit is monotone in motor mass") {
  double prev = 0.0;
  for (double m : {0.02, 0.053, 0.1, 0.2, 0.4}) {
    const double t = torque_limit(m);
    CHECK(t > prev);
    prev = t;
  }
  CHECK_THROWS_AS(torque_limit(0.0), InvalidDesignError);
  CHECK_THROWS_AS(speed_torque_gradient(-1.0), InvalidDesignError);
}

TEST_CASE("joule losses shrink as the motor grows") {
  CHECK(1.0 / speed_torque_gradient(0.2) < 1.0 / speed_torque_gradient(0.05));
}

TEST_CASE("motor torque and friction") {
  ActuatorParams a = stock_actuator();

  SUBCASE("rest: sign(0) = 0") {
    const MotorTorques t = motor_torque_and_friction(0.0, 0.0, a);
    CHECK(t.friction == 0.0);
    CHECK(t.total == 0.0);
    CHECK(t.speed == 0.0);
  }

  SUBCASE("frictionless transmission reduces to u/n") {
    a.coulomb_friction = 0.0;
    a.viscous_friction = 0.0;
    const MotorTorques t = motor_torque_and_friction(0.9, 3.0, a);
    CHECK(t.total == doctest::Approx(0.9 / 9.0).epsilon(1e-15));
  }

  SUBCASE("hand-computed example") {
    const MotorTorques t = motor_torque_and_friction(1.0, 2.0, a);
    CHECK(t.speed == doctest::Approx(18.0));
    CHECK(t.friction == doctest::Approx(0.01 + 0.001 * 18.0).epsilon(1e-15));
    CHECK(t.total == doctest::Approx(1.0 / 9.0 + 0.01 + 0.018).epsilon(1e-15));
  }
}

TEST_CASE("power decomposition") {
  ActuatorParams a = stock_actuator();

  SUBCASE("all zero at rest") {
    const PowerBreakdown p = power_terms(0.0, 0.0, a);
    CHECK(p.mechanical == 0.0);
    CHECK(p.joule == 0.0);
    CHECK(p.friction == 0.0);
    CHECK(p.electrical == 0.0);
  }

  SUBCASE("pure spin dissipates in friction and joule terms") {
    const PowerBreakdown p = power_terms(0.0, 3.0, a);
    CHECK(p.mechanical == 0.0);
    CHECK(p.friction > 0.0);
    CHECK(p.joule > 0.0);
  }

  SUBCASE("regeneration is discarded") {
    // Strongly negative mechanical power dominates the joule term.
    const PowerBreakdown p = power_terms(2.0, -8.0, a);
    CHECK(p.mechanical == doctest::Approx(-16.0));
    CHECK(p.mechanical + p.joule < 0.0);
    CHECK(p.electrical == 0.0);
  }

  SUBCASE("friction power is never negative for passive transmissions") {
    for (double v : {-5.0, -0.3, 0.0, 0.4, 6.0}) {
      for (double u : {-2.0, 0.0, 1.5}) {
        CHECK(power_terms(u, v, a).friction >= 0.0);
      }
    }
  }

  SUBCASE("joule-torque switch") {
    a.joule_torque = JouleTorque::kFriction;
    const PowerBreakdown pf = power_terms(1.0, 2.0, a);
    a.joule_torque = JouleTorque::kTotal;
    const PowerBreakdown pt = power_terms(1.0, 2.0, a);
    const double km = speed_torque_gradient(a.motor_mass);
    const MotorTorques t = motor_torque_and_friction(1.0, 2.0, a);
    CHECK(pf.joule == doctest::Approx(t.friction * t.friction / km));
    CHECK(pt.joule == doctest::Approx(t.total * t.total / km));
  }
}

TEST_CASE("codesign cost over knot arrays") {
  const ActuatorParams a = stock_actuator();

  SUBCASE("zero motion costs nothing") {
    const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(10, 4);
    const Eigen::VectorXd dt = Eigen::VectorXd::Constant(10, 0.01);
    CHECK(codesign_cost(z, z, dt, a) == 0.0);
  }

  SUBCASE("single knot rectangle rule") {
    Eigen::MatrixXd u(1, 1), v(1, 1);
    u << 1.0;
    v << 2.0;
    const Eigen::VectorXd dt = Eigen::VectorXd::Constant(1, 0.01);
    const PowerBreakdown p = power_terms(1.0, 2.0, a);
    const double expected = (p.electrical + std::max(p.friction, 0.0)) * 0.01;
    CHECK(codesign_cost(u, v, dt, a) == doctest::Approx(expected).epsilon(1e-15));
  }

  SUBCASE("zero-duration knots contribute nothing") {
    Eigen::MatrixXd u(2, 1), v(2, 1);
    u << 1.0, 5.0;
    v << 2.0, 9.0;
    Eigen::VectorXd dt(2);
    dt << 0.01, 0.0;
    Eigen::MatrixXd u1 = u.topRows(1), v1 = v.topRows(1);
    const Eigen::VectorXd dt1 = dt.head(1);
    CHECK(codesign_cost(u, v, dt, a) == codesign_cost(u1, v1, dt1, a));
  }

  SUBCASE("non-negative for random inputs") {
    Eigen::MatrixXd u(50, 4), v(50, 4);
    unsigned s = 12345;
    auto next = [&]() {
      s = s * 1103515245u + 12345u;
      return (static_cast<double>(s % 2000) - 1000.0) / 500.0;
    };
    for (int i = 0; i < 50; ++i) {
      for (int j = 0; j < 4; ++j) {
        u(i, j) = next();
        v(i, j) = 5.0 * next();
      }
    }
    const Eigen::VectorXd dt = Eigen::VectorXd::Constant(50, 0.01);
    CHECK(codesign_cost(u, v, dt, a) >= 0.0);
  }

  SUBCASE("quadrature refinement converges") {
    // Smooth torque/speed profiles sampled at dt and dt/2.
    auto sample = [&](int n, double total_time) {
      Eigen::MatrixXd u(n, 1), v(n, 1);
      const double dt = total_time / n;
      for (int k = 0; k < n; ++k) {
        const double t = k * dt;
        u(k, 0) = 0.8 * std::sin(2.0 * t) + 0.2;
        v(k, 0) = 3.0 * std::cos(3.0 * t);
      }
      return codesign_cost(u, v, Eigen::VectorXd::Constant(n, dt), a);
    };
    const double exact = sample(6400, 1.0);
    const double coarse = std::abs(sample(100, 1.0) - exact);
    const double fine = std::abs(sample(200, 1.0) - exact);
    CHECK(fine < 0.75 * coarse);
    CHECK(coarse / exact < 0.05);
  }

  SUBCASE("frictionless joule power scales quadratically with torque") {
    ActuatorParams fr = a;
    fr.coulomb_friction = 0.0;
    fr.viscous_friction = 0.0;
    for (double v : {-2.0, 0.5, 4.0}) {
      const PowerBreakdown p1 = power_terms(0.7, v, fr);
      const PowerBreakdown p2 = power_terms(1.4, v, fr);
      CHECK(p2.joule == doctest::Approx(4.0 * p1.joule).epsilon(1e-12));
    }
  }
}

}  // namespace
}  // namespace codesign
