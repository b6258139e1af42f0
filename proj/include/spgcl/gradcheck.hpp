// Copyright 2026 The SPGCL Authors
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


#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spgcl/autodiff.hpp"
#include "spgcl/matrix.hpp"

namespace spgcl {

struct GradcheckConfig {
  std::uint64_t seed = 0;
  std::size_t coords = 50;  // sampled coordinates per check
  double h = 1e-5;
  double tolerance = 1e-4;
  /// Relative error is |a - n| / max(|a|, |n|, denom_floor).
  double denom_floor = 1e-6;
  /// Test hook forwarded to Tape::inject_gradient_fault; empty disables it.
  std::string fault_op;
  double fault_factor = 1.0;
};

struct CoordinateFailure {
  std::size_t input = 0;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct CheckResult {
  std::string name;
  std::size_t coords_checked = 0;
  std::size_t coords_skipped = 0;  // redrawn because a ReLU changed state within +-h
  double max_rel_error = 0.0;
  std::vector<CoordinateFailure> failures;

  [[nodiscard]] bool passed() const noexcept { return failures.empty() && coords_checked > 0; }
};

struct GradcheckReport {
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  [[nodiscard]] bool passed() const noexcept;
  /// One line per check: name, coords, max relative error, PASS/FAIL, then
  /// the failing coordinates.
  [[nodiscard]] std::string format() const;
};

/// Builds a scalar loss from the given inputs on a fresh tape.
using LossBuilder = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

/// Compares reverse-mode gradients of `build` against central differences on
/// `cfg.coords` coordinates drawn uniformly over all entries of `inputs`.
CheckResult check_gradient(const std::string& name, const LossBuilder& build,
                           const std::vector<Matrix>& inputs, const GradcheckConfig& cfg);

/// Every primitive op plus the task, InfoNCE, consistency and total
/// objectives of a small GCN on a 10-node SBM.
GradcheckReport run_gradcheck(const GradcheckConfig& cfg);

}  // namespace spgcl
