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

#include "spgcl/autodiff.hpp"
#include "spgcl/encoder.hpp"
#include "spgcl/graph.hpp"

namespace spgcl {

struct LossWeights {
  double beta = 1.0;   // InfoNCE weight
  double gamma = 1.0;  // consistency weight
  double tau = 0.5;    // InfoNCE temperature
  /// Divide the consistency term by N^2. Off reproduces the raw squared
  /// Frobenius norm.
  bool normalize_consistency = true;
  /// Average the perturbed->original and original->perturbed directions.
  bool symmetric_infonce = false;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Mean cross-entropy over the train mask. Throws EmptyTrainSet.
ad::Var task_loss(ad::Tape& tape, ad::Var logits, const LabelSet& labels);

/// Layer-summed InfoNCE: anchors from the perturbed view, candidates from the
/// original view, cosine similarity (zero rows score 0). Throws
/// DimensionMismatch when the views disagree in depth or shape.
ad::Var infonce_loss(ad::Tape& tape, const LayerEmbeddings& pert, const LayerEmbeddings& raw,
                     const LossWeights& w);

/// ||S_raw - S_pert||_F^2 (divided by N^2 when normalized) where S = Z Z^T of
/// row-normalized final-layer embeddings.
ad::Var consistency_loss(ad::Tape& tape, ad::Var pert_final, ad::Var raw_final,
                         bool normalize = true);

/// task + beta * infonce + gamma * consistency on the tape.
ad::Var total_loss(ad::Tape& tape, ad::Var task, ad::Var infonce, ad::Var consistency,
                   const LossWeights& w);

/// Scalar form of total_loss. Throws NonFiniteValue.
double total_loss(double task, double infonce, double consistency, const LossWeights& w);

// Value-only conveniences over plain matrices.
double task_loss_value(const Matrix& logits, const LabelSet& labels);
double infonce_value(const std::vector<Matrix>& pert_layers, const std::vector<Matrix>& raw_layers,
                     double tau);
double consistency_value(const Matrix& pert_final, const Matrix& raw_final, bool normalize = true);

}  // namespace spgcl
