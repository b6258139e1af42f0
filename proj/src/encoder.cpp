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


#include "spgcl/encoder.hpp"

#include <cmath>
#include <string>

#include "spgcl/error.hpp"

namespace spgcl {

std::vector<std::size_t> GcnParams::dims() const {
  std::vector<std::size_t> d;
  if (weights.empty()) return d;
  d.push_back(weights.front().rows());
  for (const auto& w : weights) d.push_back(w.cols());
  return d;
}

std::size_t GcnParams::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.size();
  return n;
}

void GcnParams::validate() const {
  for (std::size_t l = 0; l + 1 < weights.size(); ++l) {
    if (weights[l].cols() != weights[l + 1].rows()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "layer " + std::to_string(l) + " output does not feed layer " +
                      std::to_string(l + 1));
    }
  }
  for (const auto& w : weights) {
    if (!w.all_finite()) throw Error(ErrorCode::kNonFiniteValue, "non-finite weight");
  }
}

GcnParams init_params(const std::vector<std::size_t>& dims, SeededRng& rng) {
  if (dims.size() < 2) {
    throw Error(ErrorCode::kDimensionMismatch, "need at least input and output dims");
  }
  GcnParams p;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
    Matrix w(dims[l], dims[l + 1]);
    for (double& x : w.values()) x = rng.uniform(-bound, bound);
    p.weights.push_back(std::move(w));
  }
  return p;
}

BoundParams bind_params(ad::Tape& tape, const GcnParams& params) {
  BoundParams b;
  for (const auto& w : params.weights) b.weights.push_back(tape.parameter(w));
  return b;
}

std::vector<Matrix> param_grads(const ad::Tape& tape, const BoundParams& bound) {
  std::vector<Matrix> g;
  g.reserve(bound.weights.size());
  for (ad::Var w : bound.weights) g.push_back(tape.grad(w));
  return g;
}

ad::Var project_input(ad::Tape& tape, const BoundParams& params, ad::Var x,
                      const EncoderOptions& opts) {
  if (params.weights.empty()) throw Error(ErrorCode::kDimensionMismatch, "encoder has no layers");
  if (opts.dropout > 0.0 && opts.dropout_rng != nullptr) {
    x = ad::dropout(tape, x, opts.dropout, *opts.dropout_rng);
  }
  return ad::matmul(tape, x, params.weights.front());
}

LayerEmbeddings propagate(ad::Tape& tape, const BoundParams& params,
                          const std::shared_ptr<const SparseMatrix>& norm_adj, ad::Var projected,
                          const EncoderOptions& opts) {
  LayerEmbeddings out;
  const std::size_t layers = params.weights.size();
  ad::Var h = projected;
  for (std::size_t l = 0; l < layers; ++l) {
    if (l > 0) {
      if (opts.dropout > 0.0 && opts.dropout_rng != nullptr) {
        h = ad::dropout(tape, h, opts.dropout, *opts.dropout_rng);
      }
      h = ad::matmul(tape, h, params.weights[l]);
    }
    h = ad::spmm(tape, norm_adj, h);
    if (l + 1 < layers) h = ad::relu(tape, h);
    if (!tape.value(h).all_finite()) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "non-finite activation at layer " + std::to_string(l + 1));
    }
    out.layers.push_back(h);
  }
  return out;
}

LayerEmbeddings forward(ad::Tape& tape, const BoundParams& params,
                        const std::shared_ptr<const SparseMatrix>& norm_adj, ad::Var x,
                        const EncoderOptions& opts) {
  return propagate(tape, params, norm_adj, project_input(tape, params, x, opts), opts);
}

Matrix predict_logits(const GcnParams& params, const SparseMatrix& norm_adj, const Matrix& x) {
  Matrix h = x;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    h = spmv(norm_adj, matmul(h, params.weights[l]));
    if (l + 1 < params.weights.size()) {
      for (double& v : h.values()) v = v > 0.0 ? v : 0.0;
    }
  }
  return h;
}

}  // namespace spgcl
