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

#include "codesign/cma.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "codesign/errors.hpp"
#include "codesign/parallel.hpp"
#include "codesign/rng.hpp"

namespace codesign {

namespace {

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

double penalized_objective(const CodesignProblem& problem,
                           const ObjectiveFunction& objective,
                           const DesignVector& rho, double penalty_weight,
                           const Trajectory* warm, double worst_seen,
                           bool* failed) {
  if (failed != nullptr) *failed = false;
  const DesignParams p = rho.to_vector();
  const DesignParams lo = problem.bounds.lower.to_vector();
  const DesignParams hi = problem.bounds.upper.to_vector();
  const DesignParams range = hi - lo;

  double penalty = 0.0;
  const Eigen::VectorXd c = design_constraints(rho);
  for (int j = 0; j < c.size(); ++j) {
    const double viol = std::max(c[j], 0.0);
    penalty += penalty_weight * viol * viol;
  }
  for (int i = 0; i < kDesignDim; ++i) {
    // Bound violations in normalized units so meters and ratios compare.
    const double viol =
        std::max({lo[i] - p[i], p[i] - hi[i], 0.0}) / range[i];
    penalty += penalty_weight * viol * viol;
  }

  try {
    return objective.evaluate(rho, warm, nullptr) + penalty;
  } catch (const EvaluationError&) {
    if (failed != nullptr) *failed = true;
    const double base = worst_seen > 0.0 ? worst_seen : 1e6;
    return 10.0 * base + penalty;
  }
}

CodesignResult cma_optimize(const CodesignProblem& problem,
                            const DesignVector& rho0, const CmaConfig& config,
                            const ObjectiveFunction& objective) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = static_cast<int>(problem.active_dims.size());
  const int lambda = config.pop_size;
  if (lambda < 4) throw ConfigError("CMA population size must be at least 4");

  const DesignParams lo = problem.bounds.lower.to_vector();
  const DesignParams hi = problem.bounds.upper.to_vector();
  const DesignParams range = hi - lo;
  const DesignParams base = rho0.to_vector();

  auto decode = [&](const Eigen::VectorXd& y) {
    DesignParams p = base;
    for (int a = 0; a < n; ++a) {
      const int i = problem.active_dims[static_cast<size_t>(a)];
      p[i] = lo[i] + y[a] * range[i];
    }
    return DesignVector::from_vector(p);
  };
  auto encode = [&](const DesignParams& p) {
    Eigen::VectorXd y(n);
    for (int a = 0; a < n; ++a) {
      const int i = problem.active_dims[static_cast<size_t>(a)];
      y[a] = (p[i] - lo[i]) / range[i];
    }
    return y;
  };

  // Standard strategy parameters as functions of n and lambda.
  const int mu = lambda / 2;
  Eigen::VectorXd weights(mu);
  for (int i = 0; i < mu; ++i) {
    weights[i] = std::log(mu + 0.5) - std::log(i + 1.0);
  }
  weights /= weights.sum();
  const double mu_eff = 1.0 / weights.squaredNorm();
  const double cs = (mu_eff + 2.0) / (n + mu_eff + 5.0);
  const double ds =
      1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) +
      cs;
  const double cc = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
  const double c1 = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff);
  const double cmu =
      std::min(1.0 - c1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) /
                             ((n + 2.0) * (n + 2.0) + mu_eff));
  const double chi_n =
      std::sqrt(static_cast<double>(n)) *
      (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  Eigen::VectorXd mean = encode(base);
  double sigma = config.sigma0;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd ps = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd pc = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd eigvec = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd eig_sqrt = Eigen::VectorXd::Ones(n);

  Rng rng(config.seed);

  CodesignResult result;
  result.method = "cma";
  result.task_name = problem.task.name;
  result.dims = n;
  result.seed = config.seed;
  result.rho_initial = rho0;

  // Baseline evaluation: warm-start source for every candidate and the
  // initial best.
  Trajectory nominal_traj;
  const Trajectory* warm = nullptr;
  double best = 0.0;
  double worst_seen = -1.0;
  DesignVector best_rho = rho0;
  {
    bool failed = false;
    try {
      best = objective.evaluate(rho0, nullptr, &nominal_traj);
      warm = &nominal_traj;
      worst_seen = best;
    } catch (const EvaluationError&) {
      failed = true;
      best = std::numeric_limits<double>::infinity();
    }
    result.j_initial = best;
    NlpIterationLog log;
    log.iteration = 0;
    log.j = best;
    log.calls_nominal = 1;
    log.time_s = elapsed_s(t0);
    log.best_so_far = best;
    result.iterations.push_back(log);
    (void)failed;
  }
  int evals = 1;

  std::vector<Eigen::VectorXd> ys(static_cast<size_t>(lambda));
  std::vector<Eigen::VectorXd> zs(static_cast<size_t>(lambda));
  std::vector<double> fitness(static_cast<size_t>(lambda));
  std::vector<char> failed_flags(static_cast<size_t>(lambda));

  int generation = 0;
  int stall_count = 0;
  double stall_reference = best;
  bool converged = false;
  std::string stop_reason = "evaluation budget exhausted";

  while (evals + lambda <= config.max_evals) {
    ++generation;

    // Ask: all randomness drawn sequentially so the worker count cannot
    // change the sequence.
    for (int k = 0; k < lambda; ++k) {
      Eigen::VectorXd z(n);
      for (int i = 0; i < n; ++i) z[i] = rng.normal();
      zs[static_cast<size_t>(k)] = z;
      ys[static_cast<size_t>(k)] =
          mean + sigma * (eigvec * eig_sqrt.cwiseProduct(z));
    }

    // Evaluate concurrently; sentinel assignment happens afterwards so the
    // result cannot depend on evaluation order.
    std::vector<double> raw(static_cast<size_t>(lambda));
    parallel_for(lambda, config.workers, [&](int k) {
      bool failed = false;
      raw[static_cast<size_t>(k)] = penalized_objective(
          problem, objective, decode(ys[static_cast<size_t>(k)]),
          config.penalty_weight, warm, /*worst_seen=*/-1.0, &failed);
      failed_flags[static_cast<size_t>(k)] = failed ? 1 : 0;
    });
    evals += lambda;
    for (int k = 0; k < lambda; ++k) {
      if (failed_flags[static_cast<size_t>(k)]) continue;
      worst_seen = std::max(worst_seen, raw[static_cast<size_t>(k)]);
    }
    for (int k = 0; k < lambda; ++k) {
      fitness[static_cast<size_t>(k)] =
          failed_flags[static_cast<size_t>(k)]
              ? 10.0 * (worst_seen > 0.0 ? worst_seen : 1e6)
              : raw[static_cast<size_t>(k)];
    }

    std::vector<int> order(static_cast<size_t>(lambda));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return fitness[static_cast<size_t>(a)] < fitness[static_cast<size_t>(b)];
    });

    if (fitness[static_cast<size_t>(order[0])] < best) {
      best = fitness[static_cast<size_t>(order[0])];
      best_rho = decode(ys[static_cast<size_t>(order[0])]);
    }

    // Tell: recombination and path/covariance/step-size updates.
    const Eigen::VectorXd mean_old = mean;
    Eigen::VectorXd mean_new = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd z_mean = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < mu; ++i) {
      const int k = order[static_cast<size_t>(i)];
      mean_new += weights[i] * ys[static_cast<size_t>(k)];
      z_mean += weights[i] * zs[static_cast<size_t>(k)];
    }
    mean = mean_new;

    ps = (1.0 - cs) * ps +
         std::sqrt(cs * (2.0 - cs) * mu_eff) * (eigvec * z_mean);
    const double ps_norm = ps.norm();
    const bool hsig =
        ps_norm / std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * generation)) /
            chi_n <
        1.4 + 2.0 / (n + 1.0);
    pc = (1.0 - cc) * pc;
    if (hsig) {
      pc += std::sqrt(cc * (2.0 - cc) * mu_eff) * (mean - mean_old) / sigma;
    }

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < mu; ++i) {
      const int k = order[static_cast<size_t>(i)];
      const Eigen::VectorXd d =
          (ys[static_cast<size_t>(k)] - mean_old) / sigma;
      rank_mu += weights[i] * d * d.transpose();
    }
    cov = (1.0 - c1 - cmu) * cov + c1 * (pc * pc.transpose() +
                                         (hsig ? 0.0 : cc * (2.0 - cc)) * cov) +
          cmu * rank_mu;

    sigma *= std::exp((cs / ds) * (ps_norm / chi_n - 1.0));

    // Refresh the eigen decomposition with a floor that keeps the sampler
    // positive definite.
    cov = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::VectorXd eigs = es.eigenvalues();
    const double floor_value = 1e-14 * std::max(eigs.maxCoeff(), 1e-30);
    for (int i = 0; i < n; ++i) eigs[i] = std::max(eigs[i], floor_value);
    eigvec = es.eigenvectors();
    eig_sqrt = eigs.cwiseSqrt();

    NlpIterationLog log;
    log.iteration = generation;
    log.j = fitness[static_cast<size_t>(order[0])];
    log.calls_fd = lambda;  // planner calls this generation
    log.time_s = elapsed_s(t0);
    log.best_so_far = best;
    result.iterations.push_back(log);

    // Stall detection on the best-so-far sequence.
    if (stall_reference - best >
        config.stall_tol_rel * std::max(1.0, std::abs(stall_reference))) {
      stall_reference = best;
      stall_count = 0;
    } else {
      ++stall_count;
      if (stall_count >= config.stall_generations) {
        converged = true;
        stop_reason = "best cost stalled";
        break;
      }
    }
    if (elapsed_s(t0) > config.wall_budget_s) {
      stop_reason = "wall-clock budget exhausted";
      break;
    }
  }

  result.rho_opt = best_rho;
  result.j_final = best;
  result.max_violation =
      std::max(0.0, design_constraints(best_rho).maxCoeff());
  result.converged = converged;
  result.stop_reason = stop_reason;
  result.planner_calls = evals;
  result.wall_time_s = elapsed_s(t0);
  return result;
}

CodesignResult cma_optimize(const CodesignProblem& problem,
                            const DesignVector& rho0,
                            const CmaConfig& config) {
  const PlannerObjective objective(problem);
  CodesignResult result = cma_optimize(problem, rho0, config, objective);
  // Materialize the best design's trajectory for reporting.
  try {
    Evaluation ev = evaluate_design(problem, result.rho_opt);
    result.final_trajectory = std::move(ev.trajectory);
  } catch (...) {
    // Best design may sit outside the bounds; reports then omit the motion.
  }
  return result;
}

}  // namespace codesign
