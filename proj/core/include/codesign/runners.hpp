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

#ifndef CODESIGN_RUNNERS_HPP_
#define CODESIGN_RUNNERS_HPP_

#include <string>
#include <vector>

#include "codesign/config.hpp"

namespace codesign {

enum class ExitCode {
  kSuccess = 0,
  kInternalError = 1,
  kNonConverged = 2,
  kInfeasibleDesign = 3,
};

// Every runner creates the output directory, stores the configuration
// (verbatim copy of the given file, or the effective defaults) and prints a
// short summary to stdout.

// Plans the configured task at the baseline design; writes trajectory and
// energy CSVs plus a plan summary.
ExitCode run_plan(const RunConfig& config, const std::string& config_path);

// Gradient-based co-design; optional simulation verification afterwards.
ExitCode run_codesign(const RunConfig& config, const std::string& config_path);

// CMA-ES co-design with the configured population and seed.
ExitCode run_cma(const RunConfig& config, const std::string& config_path);

// Both optimizers across the dimension presets {4, 6, 8, 12, 16} under a
// shared wall-clock budget, seeded repeats for CMA; emits study.csv.
ExitCode run_scalability(const RunConfig& config,
                         const std::string& config_path);

// Verification of a stored co-design result (nominal vs optimized design).
ExitCode run_verify(const RunConfig& config, const std::string& config_path,
                    const std::string& result_path);

// Human-readable report plus plot-ready CSVs for stored results.
ExitCode run_report(const RunConfig& config,
                    const std::vector<std::string>& result_paths);

}  // namespace codesign

#endif  // CODESIGN_RUNNERS_HPP_
