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

#ifndef CODESIGN_CMA_HPP_
#define CODESIGN_CMA_HPP_

#include <cstdint>
#include <limits>

#include "codesign/design_nlp.hpp"

namespace codesign {

struct CmaConfig {
  int pop_size = 50;
  double sigma0 = 0.2;  // in bound-normalized coordinates
  uint64_t seed = 0;
  int max_evals = 3000;
  double penalty_weight = 1e4;
  int workers = 1;
  // Early stop: best-so-far relative improvement below stall_tol for
  // stall_generations consecutive generations.
  double stall_tol_rel = 1e-6;
  int stall_generations = 15;
  double wall_budget_s = std::numeric_limits<double>::infinity();
};

// J plus quadratic soft penalties on the design constraints and the box
// bounds (normalized violation units). Evaluation failures return a large
// finite sentinel: ten times the worst cost seen so far in the run.
// `worst_seen` carries that state; pass the running maximum of successful
// evaluations (or a negative value at the very start).
double penalized_objective(const CodesignProblem& problem,
                           const ObjectiveFunction& objective,
                           const DesignVector& rho, double penalty_weight,
                           const Trajectory* warm, double worst_seen,
                           bool* failed = nullptr);

// Standard (mu/mu_w, lambda) CMA-ES over the active design dimensions in
// bound-normalized coordinates: weighted recombination, cumulative
// step-size adaptation and rank-1 + rank-mu covariance updates with an
// eigenvalue floor. Population evaluations run concurrently; given a seed
// the result does not depend on the worker count.
CodesignResult cma_optimize(const CodesignProblem& problem,
                            const DesignVector& rho0, const CmaConfig& config,
                            const ObjectiveFunction& objective);
CodesignResult cma_optimize(const CodesignProblem& problem,
                            const DesignVector& rho0, const CmaConfig& config);

}  // namespace codesign

#endif  // CODESIGN_CMA_HPP_
