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
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spgcl/graph.hpp"
#include "spgcl/matrix.hpp"
#include "spgcl/rng.hpp"

namespace spgcl::ad {

/// Handle to a node on a Tape.
struct Var {
  std::size_t index = static_cast<std::size_t>(-1);
  friend bool operator==(Var, Var) = default;
};

class Tape;

using BackwardFn = std::function<void(Tape&, std::size_t self)>;

/// Sequential record of matrix-valued operations. Values are computed
/// eagerly when an op is recorded; `backward` walks the record in reverse and
/// accumulates gradients into every node that requires them.
class Tape {
 public:
  Var constant(Matrix value);
  Var parameter(Matrix value);

  [[nodiscard]] const Matrix& value(Var v) const { return nodes_.at(v.index).value; }
  [[nodiscard]] double scalar(Var v) const;
  /// Gradient of the last backward() seed w.r.t. v; zeros if v was unreached.
  [[nodiscard]] Matrix grad(Var v) const;
  [[nodiscard]] bool requires_grad(Var v) const { return nodes_.at(v.index).requires_grad; }
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] std::string_view op_name(Var v) const { return nodes_.at(v.index).op; }

  /// Reverse sweep from a 1x1 node. Throws TapeEmpty on an empty tape and
  /// DimensionMismatch if `loss` is not scalar.
  void backward(Var loss, double seed = 1.0);

  /// Test hook: multiplies the incoming gradient of every node recorded
  /// under `op` by `factor` during backward.
  void inject_gradient_fault(std::string op, double factor);

  // Used by op implementations.
  Var record(std::string_view op, Matrix value, std::vector<std::size_t> parents,
             BackwardFn backward);
  Matrix& grad_slot(std::size_t index);
  [[nodiscard]] bool has_grad(std::size_t index) const { return !nodes_[index].grad.empty(); }
  [[nodiscard]] const Matrix& value_at(std::size_t index) const { return nodes_[index].value; }
  [[nodiscard]] bool needs(std::size_t index) const { return nodes_[index].requires_grad; }

 private:
  struct Node {
    std::string op;
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::vector<std::size_t> parents;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  std::string fault_op_;
  double fault_factor_ = 1.0;
};

// Primitive ops. Shapes are checked; mismatches throw DimensionMismatch.

Var matmul(Tape& t, Var a, Var b);
/// S * X with S held constant.
Var spmm(Tape& t, std::shared_ptr<const SparseMatrix> s, Var x);
Var relu(Tape& t, Var x);
/// Each row divided by its L2 norm; all-zero rows stay zero.
Var row_normalize(Tape& t, Var x);
Var add(Tape& t, Var a, Var b);
Var scale(Tape& t, Var x, double factor);
/// Inverted dropout with keep probability 1 - rate.
Var dropout(Tape& t, Var x, double rate, SeededRng& rng);

/// sum_ij w_ij x_ij for a constant weight matrix (1x1).
Var inner(Tape& t, Var x, const Matrix& weights);
/// sum_ij x_ij^2 (1x1).
Var frobenius_sq(Tape& t, Var x);

/// Mean over `nodes` of -log softmax(logits[v])[labels[v]], computed with a
/// max-shifted log-sum-exp (1x1).
Var cross_entropy(Tape& t, Var logits, std::span<const int> labels, std::span<const NodeId> nodes);

/// -(1/N) sum_u log( exp(a_u.c_u / tau) / sum_v exp(a_u.c_v / tau) ) for
/// row-normalized anchors A and candidates C (1x1). The N x N similarity
/// matrix is streamed in row blocks in both sweeps.
Var info_nce(Tape& t, Var anchors, Var candidates, double tau);

/// ||A A^T - B B^T||_F^2 evaluated through k x k Gram products (1x1).
Var gram_gap(Tape& t, Var a, Var b);

}  // namespace spgcl::ad
