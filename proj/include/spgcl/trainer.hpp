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
#include <memory>
#include <optional>
#include <vector>

#include "spgcl/dataset.hpp"
#include "spgcl/encoder.hpp"
#include "spgcl/losses.hpp"
#include "spgcl/perturbation.hpp"

namespace spgcl {

struct TrainConfig {
  std::size_t epochs = 300;
  double lr = 0.01;
  double weight_decay = 5e-4;
  std::size_t patience = 50;
  std::size_t runs = 5;
  std::size_t view_refresh = 1;
  std::size_t hidden = 64;
  std::size_t layers = 2;
  double dropout = 0.0;
  std::uint64_t seed = 0;
  PerturbationPlan plan{};
  LossWeights loss_weights{};

  /// Throws InvalidConfig.
  void validate() const;
  /// True when the loss needs the perturbed view at all.
  [[nodiscard]] bool uses_view() const noexcept {
    return loss_weights.beta != 0.0 || loss_weights.gamma != 0.0;
  }
};

struct TrainState {
  GcnParams params;
  std::vector<Matrix> adam_m;
  std::vector<Matrix> adam_v;
  std::size_t step = 0;
  std::size_t epoch = 0;
  double best_val_acc = -1.0;
  std::size_t best_epoch = 0;
  GcnParams best_params;

  static TrainState fresh(GcnParams params);
};

struct LossBreakdown {
  double task = 0.0;
  double infonce = 0.0;
  double consistency = 0.0;
  double total = 0.0;
};

/// The original graph with its normalized adjacency, shared by every step.
struct TrainingData {
  const DatasetBundle* bundle = nullptr;
  std::shared_ptr<const SparseMatrix> norm_adj;

  static TrainingData prepare(const DatasetBundle& bundle);
};

/// One joint step: forward on both views with the same weights, total loss,
/// backward, AdamW update. `view` and `x_view` may be null when the config
/// does not use the contrastive terms; a null `x_view` means the original
/// features. Throws NonFiniteValue.
LossBreakdown train_step(TrainState& state, const TrainingData& data, const PerturbedView* view,
                         const FeatureMatrix* x_view, const TrainConfig& cfg);

/// Fraction of `mask` nodes whose argmax logit (smallest class id on ties)
/// equals the label, on the original graph. Throws EmptyMask.
double evaluate(const GcnParams& params, const TrainingData& data, std::span<const NodeId> mask);
double accuracy_from_logits(const Matrix& logits, const LabelSet& labels,
                            std::span<const NodeId> mask);

struct EpochRecord {
  std::size_t epoch = 0;
  LossBreakdown losses;
  double val_acc = 0.0;
};

struct RunResult {
  std::uint64_t seed = 0;
  double test_acc = 0.0;
  double best_val_acc = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  LossBreakdown final_losses;
  std::vector<EpochRecord> curve;
  GcnParams best_params;
  Matrix embeddings;  // final-layer logits of best_params on the original graph
};

/// A single run seeded with cfg.seed + run_index.
RunResult fit(const DatasetBundle& bundle, const TrainConfig& cfg, std::size_t run_index = 0);

struct MultiRunResult {
  std::vector<RunResult> runs;
  double mean_test_acc = 0.0;
  double std_test_acc = 0.0;  // sample standard deviation, 0 for a single run
  std::size_t best_run = 0;   // highest test accuracy, first on ties
};

/// cfg.runs independent runs; up to `threads` run concurrently.
MultiRunResult fit_runs(const DatasetBundle& bundle, const TrainConfig& cfg,
                        std::size_t threads = 1);

void summarize(MultiRunResult& result);

}  // namespace spgcl
