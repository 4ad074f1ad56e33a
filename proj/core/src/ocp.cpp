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

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "codesign/errors.hpp"

namespace codesign {

namespace {

constexpr int kConeRowsPerContact = 4;

// Stacks the active entries of a padded [fx fz hx hz] force vector in
// contact-row order (front first).
ContactVector stack_force(const Eigen::Vector4d& padded,
                          const ContactSet& contacts) {
  ContactVector out(2 * contacts.count());
  int r = 0;
  if (contacts.front) out.segment<2>(r) = padded.head<2>(), r += 2;
  if (contacts.hind) out.segment<2>(r) = padded.tail<2>();
  return out;
}

Eigen::Vector4d pad_force(const ContactVector& stacked,
                          const ContactSet& contacts) {
  Eigen::Vector4d out = Eigen::Vector4d::Zero();
  int r = 0;
  if (contacts.front) out.head<2>() = stacked.segment<2>(r), r += 2;
  if (contacts.hind) out.tail<2>() = stacked.segment<2>(r);
  return out;
}

// Linearized cone rows for one contact (x, z): A lam <= r. Exact in the
// plane: |lam_x| <= mu lam_z plus normal-force bounds.
struct ConeRow {
  double ax, az, rhs;
};
std::array<ConeRow, kConeRowsPerContact> cone_rows(const FrictionCone& cone) {
  const double m = cone.margin;
  return {{{1.0, -cone.mu, -m},
           {-1.0, -cone.mu, -m},
           {0.0, -1.0, -cone.lambda_z_min - m},
           {0.0, 1.0, cone.lambda_z_max - m}}};
}

// Accumulates weighted squared residuals of the contact-force terms (force
// regularization and cone barrier) into the cost and, when requested, the
// Gauss-Newton expansion through the force sensitivities.
class ForceCostAccumulator {
 public:
  ForceCostAccumulator(const OcpConfig& config, const ContactSet& contacts)
      : config_(config), contacts_(contacts), nc_(2 * contacts.count()) {}

  double value(const ContactVector& lam) const {
    double cost = 0.0;
    for (int c = 0; c < contacts_.count(); ++c) {
      cost += config_.weights.force_weight_tangential * lam[2 * c] * lam[2 * c];
      cost += config_.weights.force_weight_normal * lam[2 * c + 1] * lam[2 * c + 1];
    }
    const auto rows = cone_rows(config_.cone);
    for (int c = 0; c < contacts_.count(); ++c) {
      for (const ConeRow& row : rows) {
        const double viol =
            row.ax * lam[2 * c] + row.az * lam[2 * c + 1] - row.rhs;
        if (viol > 0.0) cost += config_.weights.cone_weight * viol * viol;
      }
    }
    return cost;
  }

  // dlam_dx: nc x 14, dlam_du: nc x nu.
  void expand(const ContactVector& lam, const Eigen::MatrixXd& dlam_dx,
              const Eigen::MatrixXd& dlam_du, ActionData& data) const {
    if (nc_ == 0) return;
    Eigen::VectorXd fw(nc_);
    for (int c = 0; c < contacts_.count(); ++c) {
      fw[2 * c] = config_.weights.force_weight_tangential;
      fw[2 * c + 1] = config_.weights.force_weight_normal;
    }
    const Eigen::MatrixXd wdx = fw.asDiagonal() * dlam_dx;
    const Eigen::MatrixXd wdu = fw.asDiagonal() * dlam_du;
    data.lx.noalias() += 2.0 * wdx.transpose() * lam;
    data.lu.noalias() += 2.0 * wdu.transpose() * lam;
    data.lxx.noalias() += 2.0 * dlam_dx.transpose() * wdx;
    data.luu.noalias() += 2.0 * dlam_du.transpose() * wdu;
    data.lxu.noalias() += 2.0 * dlam_dx.transpose() * wdu;

    const double cw = config_.weights.cone_weight;
    const auto rows = cone_rows(config_.cone);
    for (int c = 0; c < contacts_.count(); ++c) {
      for (const ConeRow& row : rows) {
        const double viol =
            row.ax * lam[2 * c] + row.az * lam[2 * c + 1] - row.rhs;
        if (viol <= 0.0) continue;
        const Eigen::RowVectorXd jx =
            row.ax * dlam_dx.row(2 * c) + row.az * dlam_dx.row(2 * c + 1);
        const Eigen::RowVectorXd ju =
            row.ax * dlam_du.row(2 * c) + row.az * dlam_du.row(2 * c + 1);
        data.lx.noalias() += 2.0 * cw * viol * jx.transpose();
        data.lu.noalias() += 2.0 * cw * viol * ju.transpose();
        data.lxx.noalias() += 2.0 * cw * jx.transpose() * jx;
        data.luu.noalias() += 2.0 * cw * ju.transpose() * ju;
        data.lxu.noalias() += 2.0 * cw * jx.transpose() * ju;
      }
    }
  }

 private:
  const OcpConfig& config_;
  const ContactSet& contacts_;
  int nc_;
};

double posture_velocity_cost(const CostWeights& w, const Vector7d& q_ref,
                             const Eigen::VectorXd& x) {
  const Vector7d dq = config_difference(q_ref, x.head<7>());
  const Vector7d v = x.tail<7>();
  return dq.cwiseProduct(dq).dot(w.q_weights) +
         v.cwiseProduct(v).dot(w.v_weights);
}

void posture_velocity_expand(const CostWeights& w, const Vector7d& q_ref,
                             const Eigen::VectorXd& x, ActionData& data) {
  const Vector7d dq = config_difference(q_ref, x.head<7>());
  const Vector7d v = x.tail<7>();
  data.lx.head<7>() += 2.0 * w.q_weights.cwiseProduct(dq);
  data.lx.tail<7>() += 2.0 * w.v_weights.cwiseProduct(v);
  data.lxx.topLeftCorner<7, 7>().diagonal() += 2.0 * w.q_weights;
  data.lxx.bottomRightCorner<7, 7>().diagonal() += 2.0 * w.v_weights;
}

// One-sided quadratic barrier on |value| <= limit.
double bound_barrier_cost(double value, double limit, double weight) {
  const double over = std::max(value - limit, 0.0);
  const double under = std::max(-limit - value, 0.0);
  return weight * (over * over + under * under);
}

void bound_barrier_expand(double value, double limit, double weight, int index,
                          ActionData& data) {
  const double over = std::max(value - limit, 0.0);
  const double under = std::max(-limit - value, 0.0);
  if (over > 0.0) {
    data.lx[index] += 2.0 * weight * over;
    data.lxx(index, index) += 2.0 * weight;
  } else if (under > 0.0) {
    data.lx[index] -= 2.0 * weight * under;
    data.lxx(index, index) += 2.0 * weight;
  }
}

double state_bounds_cost(const OcpConfig& cfg, const Eigen::VectorXd& x) {
  double cost = 0.0;
  for (int j = 3; j < 7; ++j) {
    cost += bound_barrier_cost(x[j], cfg.bounds.joint_limit,
                               cfg.weights.state_bound_weight);
    cost += bound_barrier_cost(x[7 + j], cfg.bounds.joint_vel_limit,
                               cfg.weights.state_bound_weight);
  }
  return cost;
}

void state_bounds_expand(const OcpConfig& cfg, const Eigen::VectorXd& x,
                         ActionData& data) {
  for (int j = 3; j < 7; ++j) {
    bound_barrier_expand(x[j], cfg.bounds.joint_limit,
                         cfg.weights.state_bound_weight, j, data);
    bound_barrier_expand(x[7 + j], cfg.bounds.joint_vel_limit,
                         cfg.weights.state_bound_weight, 7 + j, data);
  }
}

}  // namespace

int TaskSpec::total_knots() const {
  int n = 0;
  for (const ContactPhase& p : phases) n += p.knots;
  return n;
}

Eigen::VectorXd RobotStateSpace::difference(const Eigen::VectorXd& x0,
                                            const Eigen::VectorXd& x1) const {
  Eigen::VectorXd dx(kNumX);
  dx.head<7>() = config_difference(x0.head<7>(), x1.head<7>());
  dx.tail<7>() = x1.tail<7>() - x0.tail<7>();
  return dx;
}

Eigen::VectorXd RobotStateSpace::integrate(const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& dx) const {
  Eigen::VectorXd out(kNumX);
  out.head<7>() = config_integrate(x.head<7>(), dx.head<7>());
  out.tail<7>() = x.tail<7>() + dx.tail<7>();
  return out;
}

// ---------------------------------------------------------------------------
// ContactKnotAction

ContactKnotAction::ContactKnotAction(std::shared_ptr<const StateSpace> space,
                                     std::shared_ptr<const RobotModel> model,
                                     ContactSet contacts, double dt,
                                     Vector7d q_ref, OcpConfig config,
                                     std::vector<SwingReference> swing_refs)
    : ActionModel(std::move(space), kNumU),
      model_(std::move(model)),
      contacts_(contacts),
      dt_(dt),
      q_ref_(std::move(q_ref)),
      config_(std::move(config)),
      swing_refs_(std::move(swing_refs)) {}

void ContactKnotAction::calc(ActionData& data, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u) const {
  const Vector7d q = x.head<7>();
  const Vector7d v = x.tail<7>();
  const ContactSolution sol = contact_dynamics(*model_, q, v, u, contacts_,
                                               config_.baumgarte_alpha);
  const State next = integrate_step(q, v, sol.v_dot, dt_);
  data.xnext.head<7>() = next.q;
  data.xnext.tail<7>() = next.v;
  data.force = pad_force(sol.lambda, contacts_);

  double cost = posture_velocity_cost(config_.weights, q_ref_, x);
  cost += u.cwiseProduct(u).dot(config_.weights.u_weights);
  cost += ForceCostAccumulator(config_, contacts_).value(sol.lambda);
  for (const SwingReference& ref : swing_refs_) {
    const Eigen::Vector2d p = foot_position(*model_, q, ref.foot);
    cost += ref.weight * (p - ref.target).squaredNorm();
  }
  cost += state_bounds_cost(config_, x);
  data.cost = cost;
}

void ContactKnotAction::calc_diff(ActionData& data, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u) const {
  const Vector7d q = x.head<7>();
  const Vector7d v = x.tail<7>();
  const DynamicsDerivatives dd = dynamics_derivatives(
      *model_, q, v, u, contacts_, config_.baumgarte_alpha);

  // Chain through the symplectic step: v' = v + dt vdot, q' = q + dt v'.
  const Matrix7d dvn_dq = dt_ * dd.dvdot_dq;
  const Matrix7d dvn_dv = Matrix7d::Identity() + dt_ * dd.dvdot_dv;
  const Matrix74d dvn_du = dt_ * dd.dvdot_du;
  data.fx.topLeftCorner<7, 7>() = Matrix7d::Identity() + dt_ * dvn_dq;
  data.fx.topRightCorner<7, 7>() = dt_ * dvn_dv;
  data.fx.bottomLeftCorner<7, 7>() = dvn_dq;
  data.fx.bottomRightCorner<7, 7>() = dvn_dv;
  data.fu.topRows<7>() = dt_ * dvn_du;
  data.fu.bottomRows<7>() = dvn_du;

  data.lx.setZero();
  data.lu.setZero();
  data.lxx.setZero();
  data.luu.setZero();
  data.lxu.setZero();

  posture_velocity_expand(config_.weights, q_ref_, x, data);
  data.lu += 2.0 * config_.weights.u_weights.cwiseProduct(u);
  data.luu.diagonal() += 2.0 * config_.weights.u_weights;

  const int nc = 2 * contacts_.count();
  if (nc > 0) {
    const ContactVector lam = stack_force(data.force, contacts_);
    Eigen::MatrixXd dlam_dx(nc, kNumX);
    dlam_dx.leftCols<7>() = dd.dlambda_dq;
    dlam_dx.rightCols<7>() = dd.dlambda_dv;
    ForceCostAccumulator(config_, contacts_)
        .expand(lam, dlam_dx, dd.dlambda_du, data);
  }

  for (const SwingReference& ref : swing_refs_) {
    const FootState fs = foot_kinematics(*model_, q, v, ref.foot);
    const Eigen::Vector2d res = fs.position - ref.target;
    data.lx.head<7>().noalias() +=
        2.0 * ref.weight * fs.jacobian.transpose() * res;
    data.lxx.topLeftCorner<7, 7>().noalias() +=
        2.0 * ref.weight * fs.jacobian.transpose() * fs.jacobian;
  }

  state_bounds_expand(config_, x, data);
}

// ---------------------------------------------------------------------------
// ImpulseKnotAction

ImpulseKnotAction::ImpulseKnotAction(std::shared_ptr<const StateSpace> space,
                                     std::shared_ptr<const RobotModel> model,
                                     ContactSet contacts, Vector7d q_ref,
                                     OcpConfig config,
                                     std::vector<SwingReference> touchdown_refs)
    : ActionModel(std::move(space), kNumU),
      model_(std::move(model)),
      contacts_(contacts),
      q_ref_(std::move(q_ref)),
      config_(std::move(config)),
      touchdown_refs_(std::move(touchdown_refs)) {}

void ImpulseKnotAction::calc(ActionData& data, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u) const {
  const Vector7d q = x.head<7>();
  const Vector7d v = x.tail<7>();
  const ImpulseSolution sol = impulse_dynamics(*model_, q, v, contacts_);
  data.xnext.head<7>() = q;
  data.xnext.tail<7>() = sol.v_plus;
  data.force = pad_force(sol.impulse, contacts_);

  double cost = posture_velocity_cost(config_.weights, q_ref_, x);
  cost += u.cwiseProduct(u).dot(config_.weights.u_weights);
  cost += ForceCostAccumulator(config_, contacts_).value(sol.impulse);
  for (const SwingReference& ref : touchdown_refs_) {
    const Eigen::Vector2d p = foot_position(*model_, q, ref.foot);
    cost += ref.weight * (p - ref.target).squaredNorm();
  }
  cost += state_bounds_cost(config_, x);
  data.cost = cost;
}

void ImpulseKnotAction::calc_diff(ActionData& data, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u) const {
  const Vector7d q = x.head<7>();
  const Vector7d v = x.tail<7>();
  const ImpulseDerivatives id = impulse_derivatives(*model_, q, v, contacts_);

  data.fx.setZero();
  data.fx.topLeftCorner<7, 7>().setIdentity();
  data.fx.bottomLeftCorner<7, 7>() = id.dvplus_dq;
  data.fx.bottomRightCorner<7, 7>() = id.dvplus_dv;
  data.fu.setZero();

  data.lx.setZero();
  data.lu.setZero();
  data.lxx.setZero();
  data.luu.setZero();
  data.lxu.setZero();

  posture_velocity_expand(config_.weights, q_ref_, x, data);
  data.lu += 2.0 * config_.weights.u_weights.cwiseProduct(u);
  data.luu.diagonal() += 2.0 * config_.weights.u_weights;

  const int nc = 2 * contacts_.count();
  if (nc > 0) {
    const ContactVector lam = stack_force(data.force, contacts_);
    Eigen::MatrixXd dlam_dx(nc, kNumX);
    dlam_dx.leftCols<7>() = id.dimpulse_dq;
    dlam_dx.rightCols<7>() = id.dimpulse_dv;
    const Eigen::MatrixXd dlam_du = Eigen::MatrixXd::Zero(nc, kNumU);
    ForceCostAccumulator(config_, contacts_)
        .expand(lam, dlam_dx, dlam_du, data);
  }

  for (const SwingReference& ref : touchdown_refs_) {
    const FootState fs = foot_kinematics(*model_, q, v, ref.foot);
    const Eigen::Vector2d res = fs.position - ref.target;
    data.lx.head<7>().noalias() +=
        2.0 * ref.weight * fs.jacobian.transpose() * res;
    data.lxx.topLeftCorner<7, 7>().noalias() +=
        2.0 * ref.weight * fs.jacobian.transpose() * fs.jacobian;
  }

  state_bounds_expand(config_, x, data);
}

// ---------------------------------------------------------------------------
// TerminalAction

TerminalAction::TerminalAction(std::shared_ptr<const StateSpace> space,
                               Vector7d q_ref, double goal_base_x,
                               CostWeights weights)
    : ActionModel(std::move(space), 0),
      q_ref_(std::move(q_ref)),
      goal_base_x_(goal_base_x),
      weights_(std::move(weights)) {}

void TerminalAction::calc(ActionData& data, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& /*u*/) const {
  data.xnext = x;
  double cost = posture_velocity_cost(weights_, q_ref_, x);
  const double goal_err = x[0] - goal_base_x_;
  cost += weights_.goal_weight * goal_err * goal_err;
  data.cost = cost;
}

void TerminalAction::calc_diff(ActionData& data, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& /*u*/) const {
  data.fx.setIdentity();
  data.lx.setZero();
  data.lxx.setZero();
  posture_velocity_expand(weights_, q_ref_, x, data);
  const double goal_err = x[0] - goal_base_x_;
  data.lx[0] += 2.0 * weights_.goal_weight * goal_err;
  data.lxx(0, 0) += 2.0 * weights_.goal_weight;
}

// ---------------------------------------------------------------------------
// Problem assembly

Eigen::VectorXd ShootingProblem::knot_durations() const {
  Eigen::VectorXd d(horizon());
  for (int k = 0; k < horizon(); ++k) d[k] = running[k]->duration();
  return d;
}

ShootingProblem build_problem(std::shared_ptr<const RobotModel> model,
                              const TaskSpec& task, const OcpConfig& config) {
  const auto space = std::make_shared<RobotStateSpace>();
  const Vector7d q0 = initial_configuration(*model);
  Eigen::VectorXd x0(kNumX);
  x0.head<7>() = q0;
  x0.tail<7>().setZero();

  // Planned foot abscissae, advanced whenever a foot swings.
  double foot_x[2];
  for (Foot f : {Foot::kFront, Foot::kHind}) {
    foot_x[static_cast<int>(f)] = foot_position(*model, q0, f).x();
  }

  ShootingProblem problem;
  problem.x0 = x0;
  problem.running.reserve(static_cast<size_t>(task.total_knots()));

  const Eigen::VectorXd u_ub = model->u_max;
  const Eigen::VectorXd u_lb = -model->u_max;

  for (size_t ip = 0; ip < task.phases.size(); ++ip) {
    const ContactPhase& phase = task.phases[ip];
    if (phase.knots <= 0) {
      throw ConfigError("contact phase with non-positive knot count");
    }

    std::vector<Foot> gained;
    if (ip > 0) {
      const ContactSet& prev = task.phases[ip - 1].contacts;
      for (Foot f : {Foot::kFront, Foot::kHind}) {
        if (phase.contacts.active(f) && !prev.active(f)) gained.push_back(f);
      }
    }

    // Swing references: linear in x from the lift-off position, half-sine
    // apex in z, back on the ground at the last knot of the phase.
    struct ResolvedSwing {
      Foot foot;
      double liftoff_x, travel, apex;
    };
    std::vector<ResolvedSwing> swings;
    for (const SwingTarget& st : phase.swing_targets) {
      if (phase.contacts.active(st.foot)) {
        throw ConfigError("swing target for a foot that is in contact");
      }
      swings.push_back(
          {st.foot, foot_x[static_cast<int>(st.foot)], st.travel, st.apex_height});
    }

    for (int j = 0; j < phase.knots; ++j) {
      std::shared_ptr<ActionModel> action;
      if (j == 0 && !gained.empty()) {
        std::vector<SwingReference> refs;
        for (Foot f : gained) {
          refs.push_back({f,
                          Eigen::Vector2d(foot_x[static_cast<int>(f)], 0.0),
                          config.weights.touchdown_weight});
        }
        action = std::make_shared<ImpulseKnotAction>(
            space, model, phase.contacts, q0, config, std::move(refs));
      } else {
        std::vector<SwingReference> refs;
        const double s =
            phase.knots > 1 ? static_cast<double>(j) / (phase.knots - 1) : 1.0;
        for (const ResolvedSwing& sw : swings) {
          const Eigen::Vector2d target(
              sw.liftoff_x + s * sw.travel,
              sw.apex * std::sin(std::numbers::pi * s));
          refs.push_back({sw.foot, target, config.weights.swing_weight});
        }
        action = std::make_shared<ContactKnotAction>(
            space, model, phase.contacts, task.dt, q0, config, std::move(refs));
      }
      action->set_control_bounds(u_lb, u_ub);
      problem.running.push_back(std::move(action));
    }

    for (const ResolvedSwing& sw : swings) {
      foot_x[static_cast<int>(sw.foot)] += sw.travel;
    }
  }

  problem.terminal = std::make_shared<TerminalAction>(
      space, q0, q0[0] + task.goal_displacement, config.weights);
  return problem;
}

Eigen::Vector4d quasi_static_torques(const RobotModel& model, const Vector7d& q,
                                     const ContactSet& contacts) {
  const Vector7d h = nonlinear_effects(model, q, Vector7d::Zero());
  const int nc = 2 * contacts.count();
  Eigen::MatrixXd a(7, 4 + nc);
  a.setZero();
  a.block<4, 4>(3, 0).setIdentity();  // S^T
  int col = 4;
  for (Foot f : {Foot::kFront, Foot::kHind}) {
    if (!contacts.active(f)) continue;
    const FootState fs = foot_kinematics(model, q, Vector7d::Zero(), f);
    a.middleCols<2>(col) = fs.jacobian.transpose();
    col += 2;
  }
  const Eigen::VectorXd w = a.completeOrthogonalDecomposition().solve(h);
  Eigen::Vector4d u = w.head<4>();
  return u.cwiseMax(-model.u_max).cwiseMin(model.u_max);
}

InitialGuess cold_start(const ShootingProblem& problem, const RobotModel& model) {
  InitialGuess guess;
  const int n = problem.horizon();
  guess.xs.assign(static_cast<size_t>(n) + 1, problem.x0);
  guess.us.reserve(static_cast<size_t>(n));
  const Vector7d q0 = problem.x0.head<7>();
  // Double support is statically solvable; a partial stance is not (the
  // base tips about the support point no matter the torques). For those
  // knots: stance-leg joints keep the double-support hold torques, free
  // legs get their own exact gravity compensation, which is just the h
  // rows of their joints.
  const Eigen::Vector4d hold =
      quasi_static_torques(model, q0, ContactSet::both());
  const Vector7d h0 = nonlinear_effects(model, q0, Vector7d::Zero());
  auto guess_for = [&](const ContactSet& contacts) {
    if (contacts.count() == 2) return hold;
    Eigen::Vector4d u = hold;
    for (Foot f : {Foot::kFront, Foot::kHind}) {
      if (contacts.active(f)) continue;
      const LegModel& leg = model.leg(f);
      u[leg.hip_index - 3] = h0[leg.hip_index];
      u[leg.knee_index - 3] = h0[leg.knee_index];
    }
    return Eigen::Vector4d(u.cwiseMax(-model.u_max).cwiseMin(model.u_max));
  };
  for (const auto& action : problem.running) {
    const auto* knot = dynamic_cast<const ContactKnotAction*>(action.get());
    if (knot == nullptr) {
      guess.us.emplace_back(Eigen::VectorXd::Zero(action->nu()));
    } else {
      guess.us.emplace_back(guess_for(knot->contacts()));
    }
  }
  return guess;
}

}  // namespace codesign
