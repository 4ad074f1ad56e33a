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

#ifndef CODESIGN_OCP_HPP_
#define CODESIGN_OCP_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "codesign/dynamics.hpp"

namespace codesign {

// ---------------------------------------------------------------------------
// Task description

struct SwingTarget {
  Foot foot = Foot::kFront;
  double liftoff_x = 0.0;    // filled in when the problem is built
  double travel = 0.0;       // forward displacement over the phase
  double apex_height = 0.0;  // half-sine apex of the z reference
};

struct ContactPhase {
  ContactSet contacts;
  int knots = 0;
  std::vector<SwingTarget> swing_targets;  // one entry per swing foot
};

// A gait: ordered contact phases with knot counts, plus the step geometry.
// Swing references and the terminal goal are derived from the initial foot
// positions when the problem is built.
struct TaskSpec {
  std::string name;
  std::vector<ContactPhase> phases;
  double dt = 0.01;
  double step_length = 0.0;
  double step_height = 0.0;
  double goal_displacement = 0.0;  // terminal base-x target offset
  int total_knots() const;
};

// ---------------------------------------------------------------------------
// Cost weights and constraint parameters

// Diagonal weights of the running cost plus the soft-barrier weights. Cost
// terms are weighted squared residuals (no 1/2 factor).
struct CostWeights {
  Vector7d q_weights = (Vector7d() << 1e-1, 1e-1, 1e-1, 1e-2, 1e-2, 1e-2, 1e-2).finished();
  Vector7d v_weights = Vector7d::Constant(1e-2);
  Eigen::Vector4d u_weights = Eigen::Vector4d::Constant(1e-4);
  // Tangential contact forces live in a near-nullspace of the stance
  // dynamics (two pinned feet can squeeze against each other); they need a
  // much stronger regularization than the normal components or the solver
  // grinds against the cone barrier.
  double force_weight_tangential = 1e-3;
  double force_weight_normal = 1e-6;
  double cone_weight = 1e2;
  double swing_weight = 1e4;
  double touchdown_weight = 1e6;
  double state_bound_weight = 1e3;
  double goal_weight = 1e3;
};

struct FrictionCone {
  double mu = 0.7;
  double lambda_z_min = 0.0;
  double lambda_z_max = 200.0;
  // Inner margin of the barrier: penalties switch on this far inside the
  // true cone, so converged solutions sit strictly feasible.
  double margin = 0.01;
};

struct StateBounds {
  double joint_limit = 2.5;      // rad, symmetric
  double joint_vel_limit = 30.0; // rad/s
};

struct OcpConfig {
  CostWeights weights;
  FrictionCone cone;
  StateBounds bounds;
  double baumgarte_alpha = 50.0;
};

// ---------------------------------------------------------------------------
// Generic knot-action interface consumed by the trajectory solver

// Manifold operations of the solver's state representation. The planar robot
// wraps pitch and joint angles; test problems are plain Euclidean.
class StateSpace {
 public:
  StateSpace(int nx, int ndx) : nx_(nx), ndx_(ndx) {}
  virtual ~StateSpace() = default;
  int nx() const { return nx_; }
  int ndx() const { return ndx_; }
  // x1 (-) x0
  virtual Eigen::VectorXd difference(const Eigen::VectorXd& x0,
                                     const Eigen::VectorXd& x1) const = 0;
  virtual Eigen::VectorXd integrate(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& dx) const = 0;

 private:
  int nx_;
  int ndx_;
};

class EuclideanSpace final : public StateSpace {
 public:
  explicit EuclideanSpace(int n) : StateSpace(n, n) {}
  Eigen::VectorXd difference(const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& x1) const override {
    return x1 - x0;
  }
  Eigen::VectorXd integrate(const Eigen::VectorXd& x,
                            const Eigen::VectorXd& dx) const override {
    return x + dx;
  }
};

// x = [q (7); v (7)] with angles wrapped on the circle.
class RobotStateSpace final : public StateSpace {
 public:
  RobotStateSpace() : StateSpace(kNumX, kNumX) {}
  Eigen::VectorXd difference(const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& x1) const override;
  Eigen::VectorXd integrate(const Eigen::VectorXd& x,
                            const Eigen::VectorXd& dx) const override;
};

struct ActionData {
  Eigen::VectorXd xnext;
  double cost = 0.0;
  Eigen::Vector4d force = Eigen::Vector4d::Zero();  // [fx fz hx hz], padded
  Eigen::MatrixXd fx, fu;
  Eigen::VectorXd lx, lu;
  Eigen::MatrixXd lxx, luu, lxu;

  ActionData(int ndx, int nu)
      : xnext(Eigen::VectorXd::Zero(ndx)),
        fx(Eigen::MatrixXd::Zero(ndx, ndx)),
        fu(Eigen::MatrixXd::Zero(ndx, nu)),
        lx(Eigen::VectorXd::Zero(ndx)),
        lu(Eigen::VectorXd::Zero(nu)),
        lxx(Eigen::MatrixXd::Zero(ndx, ndx)),
        luu(Eigen::MatrixXd::Zero(nu, nu)),
        lxu(Eigen::MatrixXd::Zero(ndx, nu)) {}
};

class ActionModel {
 public:
  ActionModel(std::shared_ptr<const StateSpace> space, int nu)
      : space_(std::move(space)),
        nu_(nu),
        u_lb_(Eigen::VectorXd::Constant(nu, -kInf)),
        u_ub_(Eigen::VectorXd::Constant(nu, kInf)) {}
  virtual ~ActionModel() = default;

  // Next state, cost and contact force at (x, u).
  virtual void calc(ActionData& data, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& u) const = 0;
  // Dynamics Jacobians and Gauss-Newton cost expansion at (x, u).
  virtual void calc_diff(ActionData& data, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) const = 0;
  // Time advanced by this knot (zero for instantaneous resets).
  virtual double duration() const { return 0.0; }

  const StateSpace& space() const { return *space_; }
  std::shared_ptr<const StateSpace> space_ptr() const { return space_; }
  int nu() const { return nu_; }
  const Eigen::VectorXd& u_lb() const { return u_lb_; }
  const Eigen::VectorXd& u_ub() const { return u_ub_; }
  void set_control_bounds(const Eigen::VectorXd& lb, const Eigen::VectorXd& ub) {
    u_lb_ = lb;
    u_ub_ = ub;
  }
  bool has_control_bounds() const {
    return u_lb_.allFinite() || u_ub_.allFinite();
  }

  static constexpr double kInf = std::numeric_limits<double>::infinity();

 private:
  std::shared_ptr<const StateSpace> space_;
  int nu_;
  Eigen::VectorXd u_lb_, u_ub_;
};

// ---------------------------------------------------------------------------
// Robot knot actions

struct SwingReference {
  Foot foot = Foot::kFront;
  Eigen::Vector2d target = Eigen::Vector2d::Zero();
  double weight = 0.0;
};

// One integration knot: contact dynamics under a fixed contact set followed
// by a symplectic Euler step, with the running cost (posture, velocity,
// control and force regularization, friction-cone / swing-placement /
// state-bound barriers).
class ContactKnotAction final : public ActionModel {
 public:
  ContactKnotAction(std::shared_ptr<const StateSpace> space,
                    std::shared_ptr<const RobotModel> model, ContactSet contacts,
                    double dt, Vector7d q_ref, OcpConfig config,
                    std::vector<SwingReference> swing_refs);

  void calc(ActionData& data, const Eigen::VectorXd& x,
            const Eigen::VectorXd& u) const override;
  void calc_diff(ActionData& data, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& u) const override;
  double duration() const override { return dt_; }

  const ContactSet& contacts() const { return contacts_; }

 private:
  std::shared_ptr<const RobotModel> model_;
  ContactSet contacts_;
  double dt_;
  Vector7d q_ref_;
  OcpConfig config_;
  std::vector<SwingReference> swing_refs_;
};

// Touchdown knot: instantaneous inelastic impulse over the new contact set;
// the configuration does not move and no time passes. The control only
// enters through its regularization cost.
class ImpulseKnotAction final : public ActionModel {
 public:
  ImpulseKnotAction(std::shared_ptr<const StateSpace> space,
                    std::shared_ptr<const RobotModel> model, ContactSet contacts,
                    Vector7d q_ref, OcpConfig config,
                    std::vector<SwingReference> touchdown_refs);

  void calc(ActionData& data, const Eigen::VectorXd& x,
            const Eigen::VectorXd& u) const override;
  void calc_diff(ActionData& data, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& u) const override;

  const ContactSet& contacts() const { return contacts_; }

 private:
  std::shared_ptr<const RobotModel> model_;
  ContactSet contacts_;
  Vector7d q_ref_;
  OcpConfig config_;
  std::vector<SwingReference> touchdown_refs_;
};

// Terminal knot: posture/velocity regularization plus the base displacement
// goal.
class TerminalAction final : public ActionModel {
 public:
  TerminalAction(std::shared_ptr<const StateSpace> space, Vector7d q_ref,
                 double goal_base_x, CostWeights weights);

  void calc(ActionData& data, const Eigen::VectorXd& x,
            const Eigen::VectorXd& u) const override;
  void calc_diff(ActionData& data, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& u) const override;

 private:
  Vector7d q_ref_;
  double goal_base_x_;
  CostWeights weights_;
};

// ---------------------------------------------------------------------------
// Shooting problem

struct ShootingProblem {
  Eigen::VectorXd x0;
  std::vector<std::shared_ptr<ActionModel>> running;
  std::shared_ptr<ActionModel> terminal;

  int horizon() const { return static_cast<int>(running.size()); }
  const StateSpace& space() const { return terminal->space(); }
  Eigen::VectorXd knot_durations() const;
};

// Builds the knot sequence for a task on a concrete robot: initial
// configuration, contact phases, swing references (linear x, half-sine z
// through the apex), friction cones, state bounds and the terminal goal.
// The first knot of every phase that gains a contact is a touchdown reset.
ShootingProblem build_problem(std::shared_ptr<const RobotModel> model,
                              const TaskSpec& task, const OcpConfig& config = {});

// Least-norm torques (and contact forces) holding configuration q still
// under the given contact set; used for cold-start control guesses.
Eigen::Vector4d quasi_static_torques(const RobotModel& model, const Vector7d& q,
                                     const ContactSet& contacts);

// Cold-start guess: states pinned at x0, controls quasi-static per knot.
struct InitialGuess {
  std::vector<Eigen::VectorXd> xs;
  std::vector<Eigen::VectorXd> us;
};
InitialGuess cold_start(const ShootingProblem& problem, const RobotModel& model);

}  // namespace codesign

#endif  // CODESIGN_OCP_HPP_
