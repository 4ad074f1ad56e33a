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
#include <random>

#include <Eigen/Dense>

#include "codesign/design.hpp"
#include "codesign/errors.hpp"
#include "doctest.h"

namespace codesign {
namespace {

RobotModel baseline_model() {
  return build_model(DesignVector{}, BaselineModelConfig{});
}

Vector7d random_config(std::mt19937& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector7d q;
  q << u(gen), 0.3 + 0.2 * u(gen), 0.4 * u(gen), u(gen), u(gen), u(gen), u(gen);
  return q;
}

Vector7d random_velocity(std::mt19937& gen, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector7d v;
  for (int i = 0; i < 7; ++i) v[i] = u(gen);
  return v;
}

TEST_CASE("angle wrap lands in (-pi, pi]") {
  CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(3.0 * std::numbers::pi / 2.0) ==
        doctest::Approx(-std::numbers::pi / 2.0));
  CHECK(wrap_angle(0.1) == doctest::Approx(0.1));
}

TEST_CASE("forward kinematics: straight-down legs") {
  const RobotModel m = baseline_model();
  Vector7d q = Vector7d::Zero();
  q[1] = 0.5;
  for (Foot f : {Foot::kFront, Foot::kHind}) {
    const Eigen::Vector2d p = foot_position(m, q, f);
    const LegModel& leg = m.leg(f);
    CHECK(p.x() == doctest::Approx(leg.shoulder.x()).epsilon(1e-14));
    CHECK(p.y() == doctest::Approx(0.5 + leg.shoulder.y() - leg.upper_length -
                                   leg.lower_length)
                       .epsilon(1e-14));
  }
}

TEST_CASE("foot jacobian is consistent with finite differences") {
  const RobotModel m = baseline_model();
  std::mt19937 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector7d q = random_config(gen);
    const Vector7d v = random_velocity(gen);
    for (Foot f : {Foot::kFront, Foot::kHind}) {
      const FootState fs = foot_kinematics(m, q, v, f);
      const double h = 1e-7;
      Jacobian2x7 fd;
      for (int i = 0; i < 7; ++i) {
        Vector7d qp = q, qm = q;
        qp[i] += h;
        qm[i] -= h;
        fd.col(i) = (foot_position(m, qp, f) - foot_position(m, qm, f)) /
                    (2.0 * h);
      }
      CHECK((fs.jacobian - fd).cwiseAbs().maxCoeff() < 1e-7);
      // Velocity = J v.
      CHECK((fs.velocity - fs.jacobian * v).norm() < 1e-14);
      // Bias acceleration = d(Jv)/dt at fixed v.
      Eigen::Vector2d vel_plus, vel_minus;
      {
        const Vector7d qp = config_integrate(q, h * v);
        const Vector7d qm = config_integrate(q, -h * v);
        vel_plus = foot_kinematics(m, qp, v, f).velocity;
        vel_minus = foot_kinematics(m, qm, v, f).velocity;
      }
      const Eigen::Vector2d fd_bias = (vel_plus - vel_minus) / (2.0 * h);
      CHECK((fs.bias_acceleration - fd_bias).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("mass matrix: base translation block is the total mass") {
  const RobotModel m = baseline_model();
  std::mt19937 gen(13);
  const Vector7d q = random_config(gen);
  const Matrix7d mm = mass_matrix(m, q);
  CHECK(mm(0, 0) == doctest::Approx(m.total_mass).epsilon(1e-13));
  CHECK(mm(1, 1) == doctest::Approx(m.total_mass).epsilon(1e-13));
  CHECK(std::abs(mm(0, 1)) < 1e-13);
}

TEST_CASE("mass matrix: single-link pendulum reduction") {
  RobotModel m = baseline_model();
  // Keep only the front lower leg massive.
  m.base_mass = 0.0;
  m.base_inertia = 0.0;
  m.front.upper_mass = 0.0;
  m.front.upper_inertia = 0.0;
  m.hind.upper_mass = 0.0;
  m.hind.upper_inertia = 0.0;
  m.hind.lower_mass = 0.0;
  m.hind.lower_inertia = 0.0;
  m.total_mass = m.front.lower_mass;

  std::mt19937 gen(17);
  const Vector7d q = random_config(gen);
  const Matrix7d mm = mass_matrix(m, q);
  const double lc = 0.5 * m.front.lower_length;
  const double expected =
      m.front.lower_mass * lc * lc + m.front.lower_inertia;  // about the knee
  CHECK(mm(4, 4) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("mass matrix equals the velocity Hessian of kinetic energy") {
  const RobotModel m = baseline_model();
  std::mt19937 gen(19);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector7d q = random_config(gen);
    const Matrix7d mm = mass_matrix(m, q);
    // T = 1/2 v^T M v, so T evaluated on basis vectors recovers M.
    for (int i = 0; i < 7; ++i) {
      for (int j = i; j < 7; ++j) {
        Vector7d vi = Vector7d::Zero(), vj = Vector7d::Zero();
        vi[i] = 1.0;
        vj[j] = 1.0;
        const double tij = kinetic_energy(m, q, vi + vj) -
                           kinetic_energy(m, q, vi) -
                           kinetic_energy(m, q, vj);
        CHECK(mm(i, j) == doctest::Approx(tij).epsilon(1e-10));
      }
    }
    // Symmetric positive definite.
    CHECK((mm - mm.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix7d> es(mm);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("nonlinear effects: statics") {
  const RobotModel m = baseline_model();
  std::mt19937 gen(23);
  const Vector7d q = random_config(gen);
  const Vector7d h = nonlinear_effects(m, q, Vector7d::Zero());
  CHECK(h[1] == doctest::Approx(m.total_mass * m.gravity).epsilon(1e-13));
  CHECK(std::abs(h[0]) < 1e-12);  // gravity has no x component
}

TEST_CASE("nonlinear effects: energy rate vanishes without gravity") {
  RobotModel m = baseline_model();
  m.gravity = 0.0;
  std::mt19937 gen(29);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector7d q = random_config(gen);
    const Vector7d v = random_velocity(gen);
    // v' h(q,v) must equal 1/2 v' (dM/dt) v; equivalently the power of the
    // Coriolis forces is the kinetic-energy storage rate.
    const double h_power = v.dot(nonlinear_effects(m, q, v));
    const double eps = 1e-7;
    const Vector7d qp = config_integrate(q, eps * v);
    const Vector7d qm = config_integrate(q, -eps * v);
    const Matrix7d dm_dt =
        (mass_matrix(m, qp) - mass_matrix(m, qm)) / (2.0 * eps);
    const double storage = 0.5 * v.dot(dm_dt * v);
    CHECK(h_power == doctest::Approx(storage).epsilon(1e-6));
  }
}

TEST_CASE("nonlinear effects match the Lagrangian finite-difference oracle") {
  const RobotModel m = baseline_model();
  std::mt19937 gen(31);
  const double eps = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    const Vector7d q = random_config(gen);
    const Vector7d v = random_velocity(gen);

    // h = (dM/dt) v - dT/dq + dV/dq.
    const Vector7d qp = config_integrate(q, eps * v);
    const Vector7d qm = config_integrate(q, -eps * v);
    const Matrix7d dm_dt = (mass_matrix(m, qp) - mass_matrix(m, qm)) / (2 * eps);

    Vector7d grad = Vector7d::Zero();
    for (int i = 0; i < 7; ++i) {
      Vector7d qe = q;
      qe[i] += eps;
      const double lp = kinetic_energy(m, qe, v) - potential_energy(m, qe);
      qe[i] = q[i] - eps;
      const double lm = kinetic_energy(m, qe, v) - potential_energy(m, qe);
      grad[i] = (lp - lm) / (2 * eps);
    }
    const Vector7d oracle = dm_dt * v - grad;
    const Vector7d h = nonlinear_effects(m, q, v);
    CHECK((h - oracle).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("contact dynamics: free fall") {
  const RobotModel m = baseline_model();
  const Vector7d q0 = initial_configuration(m);
  const ContactSolution sol = contact_dynamics(
      m, q0, Vector7d::Zero(), Eigen::Vector4d::Zero(), ContactSet::none());
  Vector7d expected = Vector7d::Zero();
  expected[1] = -m.gravity;
  CHECK((sol.v_dot - expected).cwiseAbs().maxCoeff() < 1e-11);
  CHECK(sol.lambda.size() == 0);
}

TEST_CASE("contact dynamics: static force balance") {
  const RobotModel m = baseline_model();
  const Vector7d q0 = initial_configuration(m);
  // Independent least-squares gravity compensation over (u, lambda).
  const Vector7d h = nonlinear_effects(m, q0, Vector7d::Zero());
  Eigen::MatrixXd a(7, 8);
  a.setZero();
  a.block<4, 4>(3, 0).setIdentity();
  a.middleCols<2>(4) =
      foot_kinematics(m, q0, Vector7d::Zero(), Foot::kFront).jacobian.transpose();
  a.middleCols<2>(6) =
      foot_kinematics(m, q0, Vector7d::Zero(), Foot::kHind).jacobian.transpose();
  const Eigen::VectorXd w = a.completeOrthogonalDecomposition().solve(h);
  REQUIRE((a * w - h).norm() < 1e-10);  // statics are solvable in stance

  const Eigen::Vector4d u = w.head<4>();
  const ContactSolution sol =
      contact_dynamics(m, q0, Vector7d::Zero(), u, ContactSet::both());
  CHECK(sol.v_dot.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(sol.lambda[1] + sol.lambda[3] ==
        doctest::Approx(m.total_mass * m.gravity).epsilon(1e-8));
}

TEST_CASE("contact dynamics: KKT residual on random states") {
  const RobotModel m = baseline_model();
  std::mt19937 gen(37);
  std::uniform_real_distribution<double> uu(-2.0, 2.0);
  const double alpha = 50.0;
  const ContactSet sets[] = {ContactSet::both(), ContactSet::only(Foot::kFront),
                             ContactSet::only(Foot::kHind)};
  for (int trial = 0; trial < 100; ++trial) {
    const Vector7d q = random_config(gen);
    const Vector7d v = random_velocity(gen, 2.0);
    Eigen::Vector4d u;
    for (int i = 0; i < 4; ++i) u[i] = uu(gen);
    const ContactSet& cs = sets[trial % 3];
    const ContactSolution sol = contact_dynamics(m, q, v, u, cs, alpha);

    // Substitute back into the KKT equations.
    const Matrix7d mm = mass_matrix(m, q);
    const Vector7d h = nonlinear_effects(m, q, v);
    Vector7d tau = -h;
    tau.segment<4>(3) += u;
    Eigen::MatrixXd jc(2 * cs.count(), 7);
    Eigen::VectorXd rhs(2 * cs.count());
    int r = 0;
    for (Foot f : {Foot::kFront, Foot::kHind}) {
      if (!cs.active(f)) continue;
      const FootState fs = foot_kinematics(m, q, v, f);
      jc.middleRows<2>(r) = fs.jacobian;
      rhs.segment<2>(r) =
          -(fs.bias_acceleration + 2.0 * alpha * fs.velocity +
            alpha * alpha * Eigen::Vector2d(0.0, fs.position.y()));
      r += 2;
    }
    const double res_dyn =
        (mm * sol.v_dot - tau - jc.transpose() * sol.lambda).cwiseAbs().maxCoeff();
    const double res_con = (jc * sol.v_dot - rhs).cwiseAbs().maxCoeff();
    CHECK(res_dyn < 1e-10 * std::max(1.0, tau.cwiseAbs().maxCoeff()));
    CHECK(res_con < 1e-9);
  }
}

TEST_CASE("impulse dynamics") {
  const RobotModel m = baseline_model();
  const Vector7d q0 = initial_configuration(m);

  SUBCASE("no impact when feet already still") {
    const ImpulseSolution sol =
        impulse_dynamics(m, q0, Vector7d::Zero(), ContactSet::both());
    CHECK(sol.v_plus.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sol.impulse.cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("pure vertical drop behaves like a point mass") {
    Vector7d v = Vector7d::Zero();
    v[1] = -1.0;
    const ImpulseSolution sol = impulse_dynamics(m, q0, v, ContactSet::both());
    // All feet stop; total vertical impulse equals the momentum removed.
    for (Foot f : {Foot::kFront, Foot::kHind}) {
      const FootState fs = foot_kinematics(m, q0, sol.v_plus, f);
      CHECK(fs.velocity.cwiseAbs().maxCoeff() < 1e-10);
    }
    const double momentum_change = m.total_mass * 1.0;
    // Vertical impulses plus residual body momentum balance.
    Vector7d dp = mass_matrix(m, q0) * (sol.v_plus - v);
    CHECK(sol.impulse[1] + sol.impulse[3] ==
          doctest::Approx(dp[1]).epsilon(1e-10));
    CHECK(dp[1] <= momentum_change + 1e-10);
  }

  SUBCASE("random impacts never gain energy and stop the feet") {
    std::mt19937 gen(41);
    for (int trial = 0; trial < 50; ++trial) {
      const Vector7d q = random_config(gen);
      const Vector7d v = random_velocity(gen, 2.0);
      const ContactSet cs =
          trial % 2 == 0 ? ContactSet::both() : ContactSet::only(Foot::kFront);
      const ImpulseSolution sol = impulse_dynamics(m, q, v, cs);
      const double e_before = kinetic_energy(m, q, v);
      const double e_after = kinetic_energy(m, q, sol.v_plus);
      CHECK(e_after <= e_before + 1e-10);
      for (Foot f : {Foot::kFront, Foot::kHind}) {
        if (!cs.active(f)) continue;
        const FootState fs = foot_kinematics(m, q, sol.v_plus, f);
        CHECK(fs.velocity.cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
}

TEST_CASE("symplectic integration") {
  SUBCASE("at rest with no acceleration nothing moves") {
    Vector7d q = Vector7d::Zero();
    q[1] = 0.4;
    const State s = integrate_step(q, Vector7d::Zero(), Vector7d::Zero(), 0.01);
    CHECK((s.q - q).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.v.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("free fall matches the discrete sum, not the continuous parabola") {
    const double g = 9.81, dt = 0.01;
    const int steps = 100;
    Vector7d q = Vector7d::Zero();
    q[1] = 2.0;
    Vector7d v = Vector7d::Zero();
    Vector7d acc = Vector7d::Zero();
    acc[1] = -g;
    for (int k = 0; k < steps; ++k) {
      const State s = integrate_step(q, v, acc, dt);
      q = s.q;
      v = s.v;
    }
    // z drop = -g dt^2 (1 + 2 + ... + n) exactly for velocity-first Euler.
    const double drop = g * dt * dt * (steps * (steps + 1)) / 2.0;
    CHECK(q[1] == doctest::Approx(2.0 - drop).epsilon(1e-12));
    CHECK(2.0 - drop != doctest::Approx(2.0 - 0.5 * g * steps * dt * steps * dt)
                            .epsilon(1e-6));
  }

  SUBCASE("angles wrap into (-pi, pi]") {
    Vector7d q = Vector7d::Zero();
    q[3] = std::numbers::pi - 0.01;
    Vector7d v = Vector7d::Zero();
    v[3] = 4.0;
    const State s = integrate_step(q, v, Vector7d::Zero(), 0.01);
    CHECK(s.q[3] == doctest::Approx(-std::numbers::pi + 0.03).epsilon(1e-12));
  }
}

TEST_CASE("dynamics derivatives match a Richardson-extrapolated oracle") {
  const RobotModel m = baseline_model();
  std::mt19937 gen(43);
  const Vector7d q = random_config(gen);
  const Vector7d v = random_velocity(gen);
  Eigen::Vector4d u;
  u << 0.3, -0.2, 0.1, 0.4;
  const ContactSet cs = ContactSet::both();
  const DynamicsDerivatives dd = dynamics_derivatives(m, q, v, u, cs);

  auto vdot_of = [&](const Vector7d& qq, const Vector7d& vv,
                     const Eigen::Vector4d& uu) {
    return contact_dynamics(m, qq, vv, uu, cs).v_dot;
  };
  // Richardson extrapolation of central differences: (4 D_{h/2} - D_h) / 3.
  auto richardson_q = [&](int i) {
    const double h = 1e-5 * std::max(1.0, std::abs(q[i]));
    auto central = [&](double step) {
      Vector7d qp = q, qm = q;
      qp[i] += step;
      qm[i] -= step;
      return ((vdot_of(qp, v, u) - vdot_of(qm, v, u)) / (2.0 * step)).eval();
    };
    return ((4.0 * central(h / 2) - central(h)) / 3.0).eval();
  };
  for (int i = 0; i < 7; ++i) {
    const Vector7d oracle = richardson_q(i);
    const double scale = std::max(1.0, oracle.cwiseAbs().maxCoeff());
    CHECK((dd.dvdot_dq.col(i) - oracle).cwiseAbs().maxCoeff() / scale < 1e-5);
  }

  SUBCASE("control derivative in flight is constant in u") {
    const DynamicsDerivatives free_dd =
        dynamics_derivatives(m, q, v, u, ContactSet::none());
    const DynamicsDerivatives free_dd2 = dynamics_derivatives(
        m, q, v, (u + Eigen::Vector4d::Constant(0.5)).eval(), ContactSet::none());
    CHECK((free_dd.dvdot_du - free_dd2.dvdot_du).cwiseAbs().maxCoeff() < 1e-6);
    // And it equals Minv * S^T.
    const Matrix7d minv = mass_matrix(m, q).inverse();
    Matrix74d expected = Matrix74d::Zero();
    expected = minv.middleCols<4>(3);
    CHECK((free_dd.dvdot_du - expected).cwiseAbs().maxCoeff() < 1e-6);
  }

  SUBCASE("Coriolis gradient vanishes at zero velocity without gravity") {
    RobotModel m0 = baseline_model();
    m0.gravity = 0.0;
    const DynamicsDerivatives d0 = dynamics_derivatives(
        m0, q, Vector7d::Zero(), Eigen::Vector4d::Zero(), ContactSet::none());
    CHECK(d0.dvdot_dv.cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("flight conserves momentum to integrator order") {
  const RobotModel m = baseline_model();
  Vector7d q = initial_configuration(m);
  q[1] = 1.0;
  Vector7d v;
  v << 0.3, 0.5, 0.8, -1.0, 0.6, 0.9, -0.7;

  auto drift_at = [&](double dt) {
    Vector7d qq = q, vv = v;
    const double l0 = angular_momentum_about_com(m, qq, vv);
    double max_drift = 0.0;
    const int steps = static_cast<int>(std::round(0.2 / dt));
    for (int k = 0; k < steps; ++k) {
      const ContactSolution sol = contact_dynamics(
          m, qq, vv, Eigen::Vector4d::Zero(), ContactSet::none());
      const State s = integrate_step(qq, vv, sol.v_dot, dt);
      qq = s.q;
      vv = s.v;
      max_drift = std::max(max_drift,
                           std::abs(angular_momentum_about_com(m, qq, vv) - l0));
    }
    return max_drift;
  };

  const double d10 = drift_at(0.01);
  const double d5 = drift_at(0.005);
  CHECK(d10 < 1e-3);
  CHECK(d5 < 0.75 * d10);  // first-order integrator: halving dt shrinks drift

  // Continuous-time momentum rate is gravity alone:
  // d(Mv)/dt = -h + (dM/dt) v has zero x component and -m g in z.
  const double eps = 1e-6;
  const Vector7d qp = config_integrate(q, eps * v);
  const Vector7d qm = config_integrate(q, -eps * v);
  const Matrix7d dm_dt = (mass_matrix(m, qp) - mass_matrix(m, qm)) / (2 * eps);
  const Vector7d mom_rate = -nonlinear_effects(m, q, v) + dm_dt * v;
  CHECK(std::abs(mom_rate[0]) < 1e-6);
  CHECK(mom_rate[1] ==
        doctest::Approx(-m.total_mass * m.gravity).epsilon(1e-7));
}

}  // namespace
}  // namespace codesign
