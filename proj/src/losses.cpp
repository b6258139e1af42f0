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


#include "spgcl/losses.hpp"

#include <cmath>
#include <string>

#include "spgcl/error.hpp"

namespace spgcl {

void LossWeights::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::kInvalidConfig, "tau must be positive and finite");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta) || !(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::kInvalidConfig, "beta and gamma must be finite and >= 0");
  }
}

ad::Var task_loss(ad::Tape& tape, ad::Var logits, const LabelSet& labels) {
  if (labels.train.empty()) throw Error(ErrorCode::kEmptyTrainSet, "train mask is empty");
  return ad::cross_entropy(tape, logits, labels.labels, labels.train);
}

ad::Var infonce_loss(ad::Tape& tape, const LayerEmbeddings& pert, const LayerEmbeddings& raw,
                     const LossWeights& w) {
  if (pert.layers.size() != raw.layers.size() || pert.layers.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "views have different layer structure");
  }
  ad::Var sum{};
  for (std::size_t l = 0; l < pert.layers.size(); ++l) {
    const ad::Var zp = ad::row_normalize(tape, pert.layers[l]);
    const ad::Var zr = ad::row_normalize(tape, raw.layers[l]);
    ad::Var term = ad::info_nce(tape, zp, zr, w.tau);
    if (w.symmetric_infonce) {
      term = ad::scale(tape, ad::add(tape, term, ad::info_nce(tape, zr, zp, w.tau)), 0.5);
    }
    sum = l == 0 ? term : ad::add(tape, sum, term);
  }
  return sum;
}

ad::Var consistency_loss(ad::Tape& tape, ad::Var pert_final, ad::Var raw_final, bool normalize) {
  const ad::Var zp = ad::row_normalize(tape, pert_final);
  const ad::Var zr = ad::row_normalize(tape, raw_final);
  const ad::Var gap = ad::gram_gap(tape, zr, zp);
  if (!normalize) return gap;
  const auto n = static_cast<double>(tape.value(pert_final).rows());
  return n == 0.0 ? gap : ad::scale(tape, gap, 1.0 / (n * n));
}

ad::Var total_loss(ad::Tape& tape, ad::Var task, ad::Var infonce, ad::Var consistency,
                   const LossWeights& w) {
  ad::Var total = task;
  if (w.beta != 0.0) total = ad::add(tape, total, ad::scale(tape, infonce, w.beta));
  if (w.gamma != 0.0) total = ad::add(tape, total, ad::scale(tape, consistency, w.gamma));
  if (!std::isfinite(tape.scalar(total))) {
    throw Error(ErrorCode::kNonFiniteValue, "total loss is not finite");
  }
  return total;
}

double total_loss(double task, double infonce, double consistency, const LossWeights& w) {
  if (!std::isfinite(task) || !std::isfinite(infonce) || !std::isfinite(consistency)) {
    throw Error(ErrorCode::kNonFiniteValue, "loss term is not finite");
  }
  return task + w.beta * infonce + w.gamma * consistency;
}

double task_loss_value(const Matrix& logits, const LabelSet& labels) {
  ad::Tape tape;
  return tape.scalar(task_loss(tape, tape.constant(logits), labels));
}

double infonce_value(const std::vector<Matrix>& pert_layers, const std::vector<Matrix>& raw_layers,
                     double tau) {
  ad::Tape tape;
  LayerEmbeddings pert;
  LayerEmbeddings raw;
  for (const auto& m : pert_layers) pert.layers.push_back(tape.constant(m));
  for (const auto& m : raw_layers) raw.layers.push_back(tape.constant(m));
  LossWeights w;
  w.tau = tau;
  return tape.scalar(infonce_loss(tape, pert, raw, w));
}

double consistency_value(const Matrix& pert_final, const Matrix& raw_final, bool normalize) {
  ad::Tape tape;
  return tape.scalar(
      consistency_loss(tape, tape.constant(pert_final), tape.constant(raw_final), normalize));
}

}  // namespace spgcl
