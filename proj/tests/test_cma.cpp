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

#include <cmath>

#include "codesign/errors.hpp"
#include "codesign/tasks.hpp"
#include "doctest.h"

namespace codesign {
namespace {

class SphereObjective final : public ObjectiveFunction {
 public:
  explicit SphereObjective(DesignParams center) : center_(std::move(center)) {}
  double evaluate(const DesignVector& rho, const Trajectory*,
                  Trajectory*) const override {
    return (rho.to_vector() - center_).squaredNorm();
  }

 private:
  DesignParams center_;
};

class FailingObjective final : public ObjectiveFunction {
 public:
  double evaluate(const DesignVector& rho, const Trajectory*,
                  Trajectory*) const override {
    if (rho.l_uf > 0.16) throw EvaluationError("synthetic");
    return rho.to_vector().squaredNorm();
  }
};

CodesignProblem sphere_problem(int dims) {
  CodesignProblem p;
  p.baseline = DesignVector{};
  p.task = task_library("stance");
  p.active_dims = active_dims_preset(dims);
  return p;
}

TEST_CASE("penalized objective") {
  const CodesignProblem problem = sphere_problem(4);
  const SphereObjective objective(DesignParams::Zero());

  SUBCASE("strictly feasible designs pay no penalty") {
    const DesignVector rho;
    const double j = objective.evaluate(rho, nullptr, nullptr);
    CHECK(penalized_objective(problem, objective, rho, 1e4, nullptr, -1.0) ==
          doctest::Approx(j).epsilon(1e-15));
  }

  SUBCASE("bound violations add a quadratic penalty in normalized units") {
    DesignVector rho;
    const double hi = problem.bounds.upper.l_uf;
    const double range = hi - problem.bounds.lower.l_uf;
    const double delta = 0.02;
    rho.l_uf = hi + delta;
    const double base = objective.evaluate(rho, nullptr, nullptr);
    const double got =
        penalized_objective(problem, objective, rho, 1e4, nullptr, -1.0);
    CHECK(got == doctest::Approx(base + 1e4 * std::pow(delta / range, 2))
                     .epsilon(1e-12));
  }

  SUBCASE("constraint violations add a quadratic penalty") {
    DesignVector rho;
    rho.x_imu = rho.x_mb = 0.0;
    rho.z_imu = rho.z_mb = 0.0;  // coincident boxes violate the separation
    const double c = box_separation(rho);
    REQUIRE(c > 0.0);
    const double base = objective.evaluate(rho, nullptr, nullptr);
    const double got =
        penalized_objective(problem, objective, rho, 1e4, nullptr, -1.0);
    CHECK(got == doctest::Approx(base + 1e4 * c * c).epsilon(1e-12));
  }

  SUBCASE("failures return a sentinel strictly worse than any success") {
    const FailingObjective failing;
    DesignVector bad;
    bad.l_uf = 0.2;
    bool failed = false;
    const double sentinel = penalized_objective(problem, failing, bad, 1e4,
                                                nullptr, 123.0, &failed);
    CHECK(failed);
    CHECK(sentinel >= 10.0 * 123.0);
  }
}

TEST_CASE("cma finds the sphere optimum") {
  CodesignProblem problem = sphere_problem(4);
  DesignParams target = DesignVector{}.to_vector();
  target[0] = 0.19;
  target[1] = 0.13;
  target[2] = 0.24;
  target[3] = 0.11;
  const SphereObjective objective(target);

  CmaConfig cfg;
  cfg.pop_size = 10;
  cfg.seed = 7;
  cfg.max_evals = 2000;
  cfg.stall_generations = 100000;  // let it run to the budget
  const CodesignResult res = cma_optimize(problem, DesignVector{}, cfg, objective);
  CHECK(res.j_final < 1e-8);
  CHECK(res.planner_calls <= 2000);
}

TEST_CASE("same seed gives identical runs, any worker count") {
  CodesignProblem problem = sphere_problem(6);
  DesignParams target = DesignVector{}.to_vector();
  target[4] = 0.1;
  target[5] = 12.0;
  const SphereObjective objective(target);

  CmaConfig cfg;
  cfg.pop_size = 12;
  cfg.seed = 99;
  cfg.max_evals = 500;
  cfg.stall_generations = 100000;

  const CodesignResult a = cma_optimize(problem, DesignVector{}, cfg, objective);
  const CodesignResult b = cma_optimize(problem, DesignVector{}, cfg, objective);
  cfg.workers = 4;
  const CodesignResult c = cma_optimize(problem, DesignVector{}, cfg, objective);

  CHECK(a.j_final == b.j_final);
  CHECK(a.j_final == c.j_final);
  CHECK((a.rho_opt.to_vector().array() == b.rho_opt.to_vector().array()).all());
  CHECK((a.rho_opt.to_vector().array() == c.rho_opt.to_vector().array()).all());
  REQUIRE(a.iterations.size() == c.iterations.size());
  for (size_t i = 0; i < a.iterations.size(); ++i) {
    CHECK(a.iterations[i].j == c.iterations[i].j);
  }
}

TEST_CASE("evaluation accounting: pop_size calls per generation") {
  class CountingObjective final : public ObjectiveFunction {
   public:
    double evaluate(const DesignVector& rho, const Trajectory*,
                    Trajectory*) const override {
      ++calls;
      return rho.to_vector().squaredNorm();
    }
    mutable std::atomic<int> calls{0};
  };
  const CountingObjective objective;
  CodesignProblem problem = sphere_problem(4);
  CmaConfig cfg;
  cfg.pop_size = 8;
  cfg.max_evals = 8 * 5 + 1;  // initial evaluation + 5 generations
  cfg.stall_generations = 100000;
  const CodesignResult res =
      cma_optimize(problem, DesignVector{}, cfg, objective);
  CHECK(objective.calls.load() == res.planner_calls);
  CHECK(res.planner_calls == 1 + 5 * 8);
  int generations = 0;
  for (const auto& it : res.iterations) {
    if (it.iteration > 0) {
      ++generations;
      CHECK(it.calls_fd == 8);
    }
  }
  CHECK(generations == 5);
}

TEST_CASE("best-so-far sequence is non-increasing") {
  CodesignProblem problem = sphere_problem(4);
  const SphereObjective objective(DesignParams::Zero());
  CmaConfig cfg;
  cfg.pop_size = 10;
  cfg.seed = 3;
  cfg.max_evals = 400;
  cfg.stall_generations = 100000;
  const CodesignResult res =
      cma_optimize(problem, DesignVector{}, cfg, objective);
  for (size_t i = 1; i < res.iterations.size(); ++i) {
    CHECK(res.iterations[i].best_so_far <=
          res.iterations[i - 1].best_so_far + 1e-15);
  }
}

TEST_CASE("failures steer the search away without crashing") {
  CodesignProblem problem = sphere_problem(4);
  const FailingObjective objective;
  CmaConfig cfg;
  cfg.pop_size = 8;
  cfg.seed = 5;
  cfg.max_evals = 600;
  cfg.stall_generations = 100000;
  const CodesignResult res =
      cma_optimize(problem, DesignVector{}, cfg, objective);
  // The optimum of |rho|^2 subject to "fails above 0.16" keeps l_uf at its
  // lower-bound region; the run must finish and improve.
  CHECK(res.j_final < res.j_initial);
  CHECK(res.rho_opt.l_uf <= 0.16);
}

}  // namespace
}  // namespace codesign
