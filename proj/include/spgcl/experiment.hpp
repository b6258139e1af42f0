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
#include <filesystem>
#include <string>
#include <vector>

#include "spgcl/config.hpp"
#include "spgcl/trainer.hpp"

namespace spgcl {

inline constexpr int kMetricsSchemaVersion = 1;

/// The dataset named by the config: loaded from disk or generated.
DatasetBundle load_bundle(const ExperimentConfig& cfg);

/// Parallel cells allowed by SPGCL_THREADS (default 1, minimum 1).
std::size_t thread_cap();

/// Git revision baked in at build time.
std::string_view build_git_hash();

/// `# git_hash=... config_digest=... seed=...` line for CSV outputs.
std::string csv_metadata(const ExperimentConfig& cfg);

struct ModeRow {
  std::string method;
  MultiRunResult result;
};

// Each command writes its files into cfg.out_dir (created on demand) and
// returns what it wrote for programmatic use.

/// metrics.json, loss_curve.csv, embeddings.csv, best_params.ckpt.
MultiRunResult cmd_train(const ExperimentConfig& cfg);

/// ablation.csv: one row per perturbation mode, shared seeds.
std::vector<ModeRow> cmd_ablate(const ExperimentConfig& cfg);

struct RobustnessRow {
  double ratio = 0.0;
  std::string method;  // "spgcl" or "gcn"
  MultiRunResult result;
};
/// robustness.csv: per (ratio, method); both methods train on the same
/// corrupted graph for a given seed.
std::vector<RobustnessRow> cmd_robustness(const ExperimentConfig& cfg);

struct GridCell {
  double p = 0.0;
  double q = 0.0;
  MultiRunResult result;
};
/// pq_grid.csv: one cell per (p, q), fixed seeds across cells.
std::vector<GridCell> cmd_pq_grid(const ExperimentConfig& cfg);

/// gradcheck.txt; returns the report.
GradcheckReport cmd_gradcheck(const ExperimentConfig& cfg);

/// Writes one perturbed view (seed = train.seed, epoch 0) in the dataset
/// layout with an explicit weight column.
PerturbedView cmd_augment(const ExperimentConfig& cfg);

/// Reads metrics.json, rejecting any schema_version other than the current.
/// Returns the parsed mean test accuracy.
double read_metrics_mean(const std::filesystem::path& file);

}  // namespace spgcl
