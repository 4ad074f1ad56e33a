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

#ifndef CODESIGN_ERRORS_HPP_
#define CODESIGN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace codesign {

// Design parameters that cannot be materialized into a physical model
// (non-positive length or mass, payload outside representable range).
class InvalidDesignError : public std::runtime_error {
 public:
  explicit InvalidDesignError(const std::string& what)
      : std::runtime_error(what) {}
};

// The initial-configuration IK has no solution for the given design.
class InfeasibleStartError : public std::runtime_error {
 public:
  explicit InfeasibleStartError(const std::string& what)
      : std::runtime_error(what) {}
};

// Rank-deficient contact Jacobian: the contact KKT system is singular.
class SingularContactError : public std::runtime_error {
 public:
  explicit SingularContactError(const std::string& what)
      : std::runtime_error(what) {}
};

// The trajectory solver exhausted its regularization schedule.
class SolverRegularizationError : public std::runtime_error {
 public:
  explicit SolverRegularizationError(const std::string& what)
      : std::runtime_error(what) {}
};

// A design evaluation (model build, start configuration or planner solve)
// failed; raised towards the upper-level optimizer which decides how to
// recover.
class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& what)
      : std::runtime_error(what) {}
};

// A finite-difference gradient component could not be computed even after
// the step-shrink retry.
class GradientError : public std::runtime_error {
 public:
  explicit GradientError(const std::string& what)
      : std::runtime_error(what) {}
};

// Every candidate in the verification gain grid diverged.
class VerificationError : public std::runtime_error {
 public:
  explicit VerificationError(const std::string& what)
      : std::runtime_error(what) {}
};

// Malformed configuration file or unknown preset/task name.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace codesign

#endif  // CODESIGN_ERRORS_HPP_
