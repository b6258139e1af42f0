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
#include <vector>

#include "spgcl/autodiff.hpp"
#include "spgcl/graph.hpp"
#include "spgcl/matrix.hpp"
#include "spgcl/rng.hpp"

namespace spgcl {

/// Weights W^(0..L-1) of an L-layer GCN with dims d -> h -> ... -> C.
struct GcnParams {
  std::vector<Matrix> weights;

  [[nodiscard]] std::size_t layers() const noexcept { return weights.size(); }
  /// d, h, ..., C
  [[nodiscard]] std::vector<std::size_t> dims() const;
  [[nodiscard]] std::size_t parameter_count() const noexcept;
  /// Throws DimensionMismatch / NonFiniteValue.
  void validate() const;

  friend bool operator==(const GcnParams&, const GcnParams&) = default;
};

/// Glorot-uniform init, bound sqrt(6 / (fan_in + fan_out)) per layer.
GcnParams init_params(const std::vector<std::size_t>& dims, SeededRng& rng);

/// Parameters bound to a tape. One instance serves both views of a training
/// step, which is what makes the encoder Siamese.
struct BoundParams {
  std::vector<ad::Var> weights;
};

BoundParams bind_params(ad::Tape& tape, const GcnParams& params);
/// Gradients for every bound weight after tape.backward().
std::vector<Matrix> param_grads(const ad::Tape& tape, const BoundParams& bound);

/// Per-layer embeddings of one view: hidden layers post-ReLU, final layer
/// the pre-softmax logits.
struct LayerEmbeddings {
  std::vector<ad::Var> layers;

  [[nodiscard]] ad::Var final_layer() const { return layers.back(); }
};

struct EncoderOptions {
  double dropout = 0.0;
  SeededRng* dropout_rng = nullptr;
};

/// X W^(0). Exposed so two views sharing features can share the product.
ad::Var project_input(ad::Tape& tape, const BoundParams& params, ad::Var x,
                      const EncoderOptions& opts = {});

/// H^(l+1) = ReLU(S H^(l) W^(l)) for hidden layers, S H W without ReLU for
/// the last, starting from a precomputed X W^(0). Throws NonFiniteValue.
LayerEmbeddings propagate(ad::Tape& tape, const BoundParams& params,
                          const std::shared_ptr<const SparseMatrix>& norm_adj, ad::Var projected,
                          const EncoderOptions& opts = {});

/// propagate(project_input(x)).
LayerEmbeddings forward(ad::Tape& tape, const BoundParams& params,
                        const std::shared_ptr<const SparseMatrix>& norm_adj, ad::Var x,
                        const EncoderOptions& opts = {});

/// Inference-only forward; returns the logits.
Matrix predict_logits(const GcnParams& params, const SparseMatrix& norm_adj, const Matrix& x);

}  // namespace spgcl
