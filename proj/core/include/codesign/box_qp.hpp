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

#ifndef CODESIGN_BOX_QP_HPP_
#define CODESIGN_BOX_QP_HPP_

#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace codesign {

struct BoxQpSettings {
  int max_iterations = 100;
  double min_gradient_norm = 1e-12;
  double min_relative_improvement = 1e-14;
  double min_step = 1e-20;
  double armijo = 0.1;
  double step_decrease = 0.5;
};

struct BoxQpResult {
  bool success = false;
  Eigen::VectorXd x;
  std::vector<int> free_set;
  std::vector<int> clamped_set;
  // Cholesky factor of the free-free Hessian block, in free_set order;
  // reused by the backward pass to form feedback gains on the free rows.
  Eigen::LLT<Eigen::MatrixXd> free_llt;
  int iterations = 0;
};

// Projected-Newton solver for min 0.5 x^T H x + g^T x s.t. lb <= x <= ub,
// with H symmetric positive definite. Components pinned at a bound with an
// outward-pushing gradient are clamped; Newton steps run on the free block
// with an Armijo backtracking line search under projection. success=false
// means the free Hessian block failed to factor (caller should regularize).
// Infinite bounds are allowed and make the problem (partially) unconstrained.
BoxQpResult box_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                   const Eigen::VectorXd& lb, const Eigen::VectorXd& ub,
                   const Eigen::VectorXd& x0,
                   const BoxQpSettings& settings = {});

}  // namespace codesign

#endif  // CODESIGN_BOX_QP_HPP_
