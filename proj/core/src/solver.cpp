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

#include "codesign/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "codesign/box_qp.hpp"
#include "codesign/errors.hpp"

namespace codesign {

struct TrajectorySolver::Workspace {
  int n = 0;
  const StateSpace* space = nullptr;

  std::vector<ActionData> datas;  // n+1, terminal last
  std::vector<Eigen::VectorXd> xs, us;
  std::vector<Eigen::VectorXd> xs_try, us_try;
  std::vector<Eigen::VectorXd> fs;  // n+1 gaps; fs[k+1] = f(x_k,u_k) (-) x_{k+1}
  std::vector<Eigen::VectorXd> vx;
  std::vector<Eigen::MatrixXd> vxx;
  std::vector<Eigen::VectorXd> kff;   // feedforward step (u + alpha*kff)
  std::vector<Eigen::MatrixXd> kfb;   // feedback gain
  std::vector<Eigen::VectorXd> qu;
  std::vector<Eigen::MatrixXd> quu;

  double cost = 0.0;
  double cost_try = 0.0;
  bool feasible = false;
  double gap_norm = 0.0;
  // Expected-improvement pieces, improvement-positive.
  double dg = 0.0;
  double dq = 0.0;
};

namespace {

Eigen::VectorXd clamped(const Eigen::VectorXd& u, const Eigen::VectorXd& lb,
                        const Eigen::VectorXd& ub) {
  return u.cwiseMax(lb).cwiseMin(ub);
}

double max_gap_norm(const std::vector<Eigen::VectorXd>& fs) {
  double g = 0.0;
  for (const auto& f : fs) g = std::max(g, f.lpNorm<Eigen::Infinity>());
  return g;
}

}  // namespace

TrajectorySolver::TrajectorySolver(SolverSettings settings)
    : settings_(settings) {}

bool TrajectorySolver::backward_pass(const ShootingProblem& problem,
                                     Workspace& ws, double reg) const {
  const int n = ws.n;
  const int ndx = ws.space->ndx();
  ws.vx[n] = ws.datas[n].lx;
  ws.vxx[n] = ws.datas[n].lxx;

  ws.dg = 0.0;
  ws.dq = 0.0;
  if (!ws.feasible) {
    ws.dg -= ws.vx[n].dot(ws.fs[n]);
    ws.dq += ws.fs[n].dot(ws.vxx[n] * ws.fs[n]);
  }

  for (int t = n - 1; t >= 0; --t) {
    const ActionData& d = ws.datas[t];
    const ActionModel& m = *problem.running[t];
    const int nu = m.nu();

    Eigen::VectorXd vx_next = ws.vx[t + 1];
    if (!ws.feasible) vx_next.noalias() += ws.vxx[t + 1] * ws.fs[t + 1];

    const Eigen::VectorXd qx = d.lx + d.fx.transpose() * vx_next;
    Eigen::MatrixXd qxx = d.lxx + d.fx.transpose() * ws.vxx[t + 1] * d.fx;
    if (!qx.allFinite() || !qxx.allFinite()) return false;

    if (nu == 0) {
      ws.kff[t].resize(0);
      ws.kfb[t].setZero(0, ndx);
      ws.qu[t].resize(0);
      ws.quu[t].resize(0, 0);
      ws.vx[t] = qx;
      ws.vxx[t] = 0.5 * (qxx + qxx.transpose());
      continue;
    }

    // Regularization enters Quu only; putting it into the cross term would
    // leak -reg products into the value recursion and destabilize it.
    const Eigen::VectorXd qu = d.lu + d.fu.transpose() * vx_next;
    Eigen::MatrixXd quu = d.luu + d.fu.transpose() * ws.vxx[t + 1] * d.fu;
    quu.noalias() += reg * d.fu.transpose() * d.fu;
    quu.diagonal().array() += reg;
    const Eigen::MatrixXd qxu = d.lxu + d.fx.transpose() * ws.vxx[t + 1] * d.fu;
    if (!qu.allFinite() || !quu.allFinite() || !qxu.allFinite()) return false;

    const BoxQpResult qp = box_qp(quu, qu, m.u_lb() - ws.us[t],
                                  m.u_ub() - ws.us[t],
                                  Eigen::VectorXd::Zero(nu));
    if (!qp.success) return false;

    ws.kff[t] = qp.x;
    Eigen::MatrixXd& gains = ws.kfb[t];
    gains.setZero(nu, ndx);
    if (!qp.free_set.empty()) {
      const int nf = static_cast<int>(qp.free_set.size());
      Eigen::MatrixXd qux_free(nf, ndx);
      for (int a = 0; a < nf; ++a) {
        qux_free.row(a) = qxu.col(qp.free_set[a]).transpose();
      }
      const Eigen::MatrixXd gains_free = -qp.free_llt.solve(qux_free);
      for (int a = 0; a < nf; ++a) {
        gains.row(qp.free_set[a]) = gains_free.row(a);
      }
    }

    ws.qu[t] = qu;
    ws.quu[t] = quu;
    ws.dg -= qu.dot(qp.x);
    ws.dq -= qp.x.dot(quu * qp.x);
    if (!ws.feasible) {
      ws.dg -= ws.vx[t].dot(ws.fs[t]);
      ws.dq += ws.fs[t].dot(ws.vxx[t] * ws.fs[t]);
    }

    ws.vx[t] = qx + gains.transpose() * (quu * qp.x + qu) + qxu * qp.x;
    Eigen::MatrixXd vxx_new = qxx + gains.transpose() * quu * gains +
                              gains.transpose() * qxu.transpose() +
                              qxu * gains;
    ws.vxx[t] = 0.5 * (vxx_new + vxx_new.transpose());
  }
  return true;
}

bool TrajectorySolver::forward_pass(const ShootingProblem& problem,
                                    Workspace& ws, double alpha) const {
  const StateSpace& space = *ws.space;
  try {
    if (ws.feasible) {
      ws.xs_try[0] = problem.x0;
    } else {
      ws.xs_try[0] = space.integrate(problem.x0, (alpha - 1.0) * ws.fs[0]);
    }
    ws.cost_try = 0.0;
    for (int t = 0; t < ws.n; ++t) {
      const ActionModel& m = *problem.running[t];
      ActionData& d = ws.datas[t];
      if (m.nu() > 0) {
        const Eigen::VectorXd dx = space.difference(ws.xs[t], ws.xs_try[t]);
        ws.us_try[t] = clamped(
            ws.us[t] + alpha * ws.kff[t] + ws.kfb[t] * dx, m.u_lb(), m.u_ub());
      }
      m.calc(d, ws.xs_try[t], ws.us_try[t]);
      if (!std::isfinite(d.cost) || !d.xnext.allFinite()) return false;
      if (ws.feasible) {
        ws.xs_try[t + 1] = d.xnext;
      } else {
        ws.xs_try[t + 1] =
            space.integrate(d.xnext, (alpha - 1.0) * ws.fs[t + 1]);
      }
      ws.cost_try += d.cost;
    }
    problem.terminal->calc(ws.datas[ws.n], ws.xs_try[ws.n], Eigen::VectorXd());
    if (!std::isfinite(ws.datas[ws.n].cost)) return false;
    ws.cost_try += ws.datas[ws.n].cost;
    return true;
  } catch (const SingularContactError&) {
    return false;
  }
}

Trajectory TrajectorySolver::solve(const ShootingProblem& problem) {
  const int n = problem.horizon();
  std::vector<Eigen::VectorXd> xs(static_cast<size_t>(n) + 1, problem.x0);
  std::vector<Eigen::VectorXd> us;
  us.reserve(static_cast<size_t>(n));
  for (const auto& m : problem.running) {
    us.emplace_back(Eigen::VectorXd::Zero(m->nu()));
  }
  return solve(problem, xs, us);
}

Trajectory TrajectorySolver::solve(const ShootingProblem& problem,
                                   const std::vector<Eigen::VectorXd>& xs_init,
                                   const std::vector<Eigen::VectorXd>& us_init) {
  const int n = problem.horizon();
  const StateSpace& space = problem.space();
  const int ndx = space.ndx();

  Workspace ws;
  ws.n = n;
  ws.space = &space;
  ws.datas.reserve(static_cast<size_t>(n) + 1);
  for (int t = 0; t < n; ++t) ws.datas.emplace_back(ndx, problem.running[t]->nu());
  ws.datas.emplace_back(ndx, 0);

  ws.xs = xs_init;
  ws.us = us_init;
  if (static_cast<int>(ws.xs.size()) != n + 1 ||
      static_cast<int>(ws.us.size()) != n) {
    throw std::invalid_argument("solver guess has wrong horizon");
  }
  for (int t = 0; t < n; ++t) {
    const ActionModel& m = *problem.running[t];
    ws.us[t] = clamped(ws.us[t], m.u_lb(), m.u_ub());
  }
  ws.xs_try = ws.xs;
  ws.us_try = ws.us;
  ws.fs.assign(static_cast<size_t>(n) + 1, Eigen::VectorXd::Zero(ndx));
  ws.vx.assign(static_cast<size_t>(n) + 1, Eigen::VectorXd::Zero(ndx));
  ws.vxx.assign(static_cast<size_t>(n) + 1, Eigen::MatrixXd::Zero(ndx, ndx));
  ws.kff.assign(static_cast<size_t>(n), Eigen::VectorXd());
  ws.kfb.assign(static_cast<size_t>(n), Eigen::MatrixXd());
  ws.qu.assign(static_cast<size_t>(n), Eigen::VectorXd());
  ws.quu.assign(static_cast<size_t>(n), Eigen::MatrixXd());

  // Initial sweep: cost and dynamics gaps of the provided guess.
  auto initial_sweep = [&]() {
    ws.cost = 0.0;
    ws.fs[0] = space.difference(ws.xs[0], problem.x0);
    for (int t = 0; t < n; ++t) {
      ActionData& d = ws.datas[t];
      problem.running[t]->calc(d, ws.xs[t], ws.us[t]);
      ws.fs[t + 1] = space.difference(ws.xs[t + 1], d.xnext);
      ws.cost += d.cost;
    }
    problem.terminal->calc(ws.datas[n], ws.xs[n], Eigen::VectorXd());
    ws.cost += ws.datas[n].cost;
  };
  initial_sweep();
  ws.gap_norm = max_gap_norm(ws.fs);
  ws.feasible = ws.gap_norm < settings_.tol_gap;

  double reg = settings_.reg_init;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason = "max iterations";
  double last_dg = 0.0;

  for (int iter = 0; iter < settings_.max_iterations; ++iter) {
    iterations = iter + 1;

    // Derivatives at the current iterate. calc refreshes the per-knot data
    // (forces in particular) that calc_diff expands around.
    for (int t = 0; t < n; ++t) {
      ActionData& d = ws.datas[t];
      problem.running[t]->calc(d, ws.xs[t], ws.us[t]);
      problem.running[t]->calc_diff(d, ws.xs[t], ws.us[t]);
    }
    problem.terminal->calc(ws.datas[n], ws.xs[n], Eigen::VectorXd());
    problem.terminal->calc_diff(ws.datas[n], ws.xs[n], Eigen::VectorXd());

    bool backward_ok = false;
    while (!backward_ok) {
      backward_ok = backward_pass(problem, ws, reg);
      if (!backward_ok) {
        reg *= settings_.reg_factor;
        if (reg > settings_.reg_max) {
          stop_reason = "regularization exhausted in backward pass";
          goto done;
        }
      }
    }
    last_dg = ws.dg;

    if (ws.feasible && ws.dg < settings_.tol_expected_improvement) {
      converged = true;
      stop_reason = "expected improvement below tolerance";
      break;
    }

    bool accepted = false;
    double accepted_alpha = 0.0;
    double dv_actual = 0.0;
    for (int a = 0; a < settings_.num_alphas; ++a) {
      const double alpha = std::pow(0.5, a);
      if (!forward_pass(problem, ws, alpha)) continue;

      // Gap-closure correction to the local model of the cost change.
      double dv = 0.0;
      if (!ws.feasible) {
        for (int t = 0; t <= n; ++t) {
          const Eigen::VectorXd dx = space.difference(ws.xs[t], ws.xs_try[t]);
          dv -= ws.fs[t].dot(ws.vxx[t] * dx);
        }
      }
      const double d0 = ws.dg + dv;
      const double d1 = ws.dq - 2.0 * dv;
      const double expected = alpha * (d0 + 0.5 * alpha * d1);
      const double actual = ws.cost - ws.cost_try;

      bool ok;
      if (expected >= 0.0) {
        ok = d0 < settings_.tiny_gradient ||
             actual > settings_.accept_fraction * expected;
      } else {
        // Gap contraction may need a bounded cost increase; never an
        // unbounded one, whatever the local model claims.
        const double cap = std::max(1.0, 0.5 * std::abs(ws.cost));
        ok = actual > settings_.accept_negative * expected && actual > -cap;
      }
      if (!ok) continue;

      // Accept: promote the candidate and refresh the gaps from the
      // rollout's own dynamics evaluations.
      ws.fs[0] = space.difference(ws.xs_try[0], problem.x0);
      for (int t = 0; t < n; ++t) {
        ws.fs[t + 1] = space.difference(ws.xs_try[t + 1], ws.datas[t].xnext);
      }
      ws.xs.swap(ws.xs_try);
      ws.us.swap(ws.us_try);
      ws.cost = ws.cost_try;
      ws.gap_norm = max_gap_norm(ws.fs);
      ws.feasible = ws.gap_norm < settings_.tol_gap;
      accepted = true;
      accepted_alpha = alpha;
      dv_actual = actual;
      break;
    }

    if (settings_.on_iteration) {
      IterationRecord rec;
      rec.iteration = iterations;
      rec.cost = ws.cost;
      rec.gap_norm = ws.gap_norm;
      rec.feasible = ws.feasible;
      rec.accepted = accepted;
      rec.alpha = accepted_alpha;
      rec.reg = reg;
      rec.expected = ws.dg;
      rec.actual = dv_actual;
      settings_.on_iteration(rec);
    }

    if (!accepted) {
      reg *= settings_.reg_factor;
      if (reg > settings_.reg_max) {
        stop_reason = "no acceptable step";
        break;
      }
      continue;
    }

    if (accepted_alpha >= 0.5) {
      reg = std::max(reg / settings_.reg_factor, settings_.reg_min);
    } else if (accepted_alpha < 0.01) {
      reg = std::min(reg * settings_.reg_factor, settings_.reg_max);
    }

    if (ws.feasible && std::abs(dv_actual) < settings_.tol_cost_change) {
      converged = true;
      stop_reason = "cost change below tolerance";
      break;
    }
  }

done:
  // Final sweep so that forces, defects and cost all describe the returned
  // trajectory.
  Trajectory traj;
  traj.xs = ws.xs;
  traj.us = ws.us;
  traj.forces.resize(static_cast<size_t>(n));
  traj.defect_norms.setZero(n + 1);
  traj.cost = 0.0;
  traj.defect_norms[0] =
      space.difference(ws.xs[0], problem.x0).lpNorm<Eigen::Infinity>();
  for (int t = 0; t < n; ++t) {
    ActionData& d = ws.datas[t];
    problem.running[t]->calc(d, ws.xs[t], ws.us[t]);
    traj.forces[static_cast<size_t>(t)] = d.force;
    traj.defect_norms[t + 1] =
        space.difference(ws.xs[t + 1], d.xnext).lpNorm<Eigen::Infinity>();
    traj.cost += d.cost;
  }
  problem.terminal->calc(ws.datas[n], ws.xs[n], Eigen::VectorXd());
  traj.cost += ws.datas[n].cost;

  traj.knot_duration = problem.knot_durations();
  traj.knot_time.setZero(n + 1);
  for (int t = 0; t < n; ++t) {
    traj.knot_time[t + 1] = traj.knot_time[t] + traj.knot_duration[t];
  }
  traj.gap_norm = traj.defect_norms.maxCoeff();
  traj.converged = converged && traj.gap_norm <= settings_.tol_gap;
  traj.iterations = iterations;
  traj.expected_improvement = last_dg;
  traj.stop_reason = stop_reason;
  return traj;
}

}  // namespace codesign
