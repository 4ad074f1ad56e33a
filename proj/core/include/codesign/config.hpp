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

#ifndef CODESIGN_CONFIG_HPP_
#define CODESIGN_CONFIG_HPP_

#include <string>

#include "codesign/cma.hpp"
#include "codesign/design_nlp.hpp"
#include "codesign/simulate.hpp"

namespace codesign {

// Everything one run needs, assembled from the built-in defaults plus an
// optional YAML config file (flat keys grouped in per-module sections; see
// docs/config.md for the full schema).
struct RunConfig {
  std::string task_name = "trot";
  int dims = 16;
  int workers = 0;  // 0: hardware concurrency
  uint64_t seed = 0;
  std::string output_dir = "out";
  double budget_seconds = 600.0;
  int repeats = 5;
  bool run_verification = false;

  DesignVector baseline;
  DesignBounds bounds = DesignBounds::defaults();
  BaselineModelConfig model;
  OcpConfig ocp;
  SolverSettings solver;
  CmaConfig cma;
  SimConfig sim;

  // Upper-level settings (see CodesignProblem for meanings).
  double fd_epsilon_rel = 0.1;
  int max_outer = 10;
  int max_inner = 5;
  int max_linesearch = 8;
  double merit_tol_rel = 1e-4;
  double grad_tol_scaled = 1e-4;
  double constraint_tol = 1e-4;

  // Assembles the upper-level problem for the configured task/dims.
  CodesignProblem make_problem() const;
  int effective_workers() const;
};

// Loads defaults overridden by the YAML file at `path` (empty path: pure
// defaults). Unknown keys raise ConfigError, so typos cannot silently
// change a study.
RunConfig load_config(const std::string& path);

// Serializes the full effective configuration as YAML text.
std::string dump_config(const RunConfig& config);

}  // namespace codesign

#endif  // CODESIGN_CONFIG_HPP_
