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

#include "codesign/box_qp.hpp"

#include <cmath>
#include <limits>

namespace codesign {

namespace {

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const Eigen::VectorXd& lb,
                      const Eigen::VectorXd& ub) {
  return x.cwiseMax(lb).cwiseMin(ub);
}

double objective(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                 const Eigen::VectorXd& x) {
  return 0.5 * x.dot(H * x) + g.dot(x);
}

}  // namespace

BoxQpResult box_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                   const Eigen::VectorXd& lb, const Eigen::VectorXd& ub,
                   const Eigen::VectorXd& x0, const BoxQpSettings& settings) {
  const int n = static_cast<int>(g.size());
  BoxQpResult res;
  res.x = clamp(x0, lb, ub);

  double value = objective(H, g, res.x);
  double improvement = std::numeric_limits<double>::infinity();
  std::vector<int> prev_clamped{-1};  // never matches a real set
  bool factored = false;

  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    res.iterations = iter + 1;
    const Eigen::VectorXd grad = g + H * res.x;

    // Active-set detection happens at the top of the loop so that the
    // returned sets and factorization always describe the final point.
    res.free_set.clear();
    res.clamped_set.clear();
    for (int i = 0; i < n; ++i) {
      const bool at_lower = res.x[i] <= lb[i] && grad[i] > 0.0;
      const bool at_upper = res.x[i] >= ub[i] && grad[i] < 0.0;
      if (at_lower || at_upper) {
        res.clamped_set.push_back(i);
      } else {
        res.free_set.push_back(i);
      }
    }
    if (res.free_set.empty()) {
      res.success = true;
      return res;
    }

    const int nf = static_cast<int>(res.free_set.size());
    if (!factored || prev_clamped != res.clamped_set) {
      Eigen::MatrixXd hff(nf, nf);
      for (int a = 0; a < nf; ++a) {
        for (int b = 0; b < nf; ++b) {
          hff(a, b) = H(res.free_set[a], res.free_set[b]);
        }
      }
      res.free_llt.compute(hff);
      if (res.free_llt.info() != Eigen::Success) {
        res.success = false;
        return res;
      }
      factored = true;
      prev_clamped = res.clamped_set;
    }

    double free_grad_sq = 0.0;
    for (int i : res.free_set) free_grad_sq += grad[i] * grad[i];
    if (free_grad_sq <
            settings.min_gradient_norm * settings.min_gradient_norm ||
        improvement <
            settings.min_relative_improvement * (1.0 + std::abs(value))) {
      res.success = true;
      return res;
    }

    // Newton step on the free block, holding clamped components at their
    // bounds: solve Hff d = -(g_f + H_fc x_c) and move x_f there.
    Eigen::VectorXd rhs(nf);
    for (int a = 0; a < nf; ++a) {
      const int i = res.free_set[a];
      double v = g[i];
      for (int j : res.clamped_set) v += H(i, j) * res.x[j];
      rhs[a] = v;
    }
    const Eigen::VectorXd target = res.free_llt.solve(-rhs);
    Eigen::VectorXd search = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < nf; ++a) {
      search[res.free_set[a]] = target[a] - res.x[res.free_set[a]];
    }

    const double slope = grad.dot(search);
    if (slope >= 0.0) {
      res.success = true;
      return res;
    }

    double step = 1.0;
    improvement = 0.0;
    for (;;) {
      const Eigen::VectorXd candidate = clamp(res.x + step * search, lb, ub);
      const double cand_value = objective(H, g, candidate);
      if (cand_value <= value + settings.armijo * step * slope) {
        improvement = value - cand_value;
        res.x = candidate;
        value = cand_value;
        break;
      }
      step *= settings.step_decrease;
      if (step < settings.min_step) {
        if (cand_value < value) {
          improvement = value - cand_value;
          res.x = candidate;
          value = cand_value;
        }
        break;
      }
    }
  }
  res.success = true;
  return res;
}

}  // namespace codesign
