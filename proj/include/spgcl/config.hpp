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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spgcl/dataset.hpp"
#include "spgcl/gradcheck.hpp"
#include "spgcl/trainer.hpp"

namespace spgcl {

/// Everything a command needs. Exactly one of `dataset_path` / `sbm` is set.
struct ExperimentConfig {
  std::string dataset_path;
  std::optional<SbmSpec> sbm;
  TrainConfig train;
  std::string out_dir = "out";
  std::vector<double> robustness_ratios{0.0, 0.1, 0.2, 0.3};
  std::vector<double> grid_p{0.0, 0.01, 0.02, 0.03};
  std::vector<double> grid_q{-0.004, 0.006, 0.016, 0.026};
  GradcheckConfig gradcheck;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Parses a JSON document. Unknown keys at any level throw InvalidConfig
/// naming the dotted key; malformed JSON throws ParseError.
ExperimentConfig parse_config(std::string_view json_text);

/// Applies "a.b.c=value" to a JSON document before parsing. The value is read
/// as JSON when it parses as JSON and as a string otherwise.
std::string apply_overrides(std::string_view json_text, const std::vector<std::string>& overrides);

/// Reads `path` (empty means "{}"), applies overrides and parses.
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

/// Canonical JSON of the fully resolved config (all defaults filled in).
std::string config_to_json(const ExperimentConfig& cfg, int indent = -1);

/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_digest(const ExperimentConfig& cfg);

/// The training config of the in-repo plain GCN baseline: same optimizer,
/// architecture and seeds, no perturbed view and no contrastive terms.
TrainConfig plain_gcn_config(const TrainConfig& cfg);

}  // namespace spgcl
