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
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "spgcl/matrix.hpp"
#include "spgcl/rng.hpp"

namespace spgcl {

using NodeId = std::uint32_t;

inline constexpr std::size_t kDefaultDenseCap = 12000;

/// Undirected edge stored canonically with a < b.
struct Edge {
  NodeId a = 0;
  NodeId b = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

inline constexpr std::uint64_t edge_key(NodeId a, NodeId b) noexcept {
  return a < b ? (static_cast<std::uint64_t>(a) << 32) | b
               : (static_cast<std::uint64_t>(b) << 32) | a;
}

/// Immutable undirected weighted graph without self-loops.
///
/// Edges are kept sorted by (a, b) with a < b; iteration order is therefore
/// canonical and every derived matrix is built in the same order.
class SparseGraph {
 public:
  SparseGraph() = default;

  /// Strict constructor: throws IndexOutOfRange on bad indices and
  /// InconsistentCounts on self-loops, duplicates or non-positive weights.
  SparseGraph(std::size_t n_nodes, std::vector<Edge> edges);

  /// Lenient constructor for raw input: orients pairs, drops self-loops and
  /// merges duplicates (first weight wins). Reports the number of dropped
  /// self-loops through `self_loops_dropped` when non-null.
  static SparseGraph from_pairs(std::size_t n_nodes,
                                std::span<const std::pair<NodeId, NodeId>> pairs,
                                std::size_t* self_loops_dropped = nullptr);

  [[nodiscard]] std::size_t n_nodes() const noexcept { return n_nodes_; }
  [[nodiscard]] std::size_t n_edges() const noexcept { return edges_.size(); }
  [[nodiscard]] std::span<const Edge> edges() const noexcept { return edges_; }

  [[nodiscard]] bool contains(NodeId a, NodeId b) const;
  /// 0 when the edge is absent.
  [[nodiscard]] double weight(NodeId a, NodeId b) const;

  /// Weighted degree of every node (without self-loop).
  [[nodiscard]] std::vector<double> degrees() const;

  friend bool operator==(const SparseGraph& x, const SparseGraph& y) {
    return x.n_nodes_ == y.n_nodes_ && x.edges_ == y.edges_;
  }

 private:
  std::size_t n_nodes_ = 0;
  std::vector<Edge> edges_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// Compressed sparse row matrix; column indices sorted within each row.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<NodeId> col_idx;
  std::vector<double> values;

  [[nodiscard]] std::size_t nnz() const noexcept { return values.size(); }
  [[nodiscard]] Matrix to_dense() const;
  [[nodiscard]] SparseMatrix transposed() const;
  [[nodiscard]] bool is_symmetric() const;

  static SparseMatrix identity(std::size_t n);
  static SparseMatrix from_dense(const Matrix& m);
};

/// Symmetric adjacency of g as CSR, weights on both (a,b) and (b,a).
SparseMatrix adjacency_matrix(const SparseGraph& g);

/// D^{-1/2} (A + I) D^{-1/2} with weighted degrees of A + I.
SparseMatrix normalize_adjacency(const SparseGraph& g);

/// Dense symmetric adjacency. Throws CapExceeded above `cap` nodes.
Matrix to_dense(const SparseGraph& g, std::size_t cap = kDefaultDenseCap);

/// Inverse of to_dense: reads the strict upper triangle. The input must be
/// symmetric with a zero diagonal.
SparseGraph graph_from_dense(const Matrix& m);

/// S * X. Throws DimensionMismatch.
Matrix spmv(const SparseMatrix& s, const Matrix& x);
/// S^T * X. Throws DimensionMismatch.
Matrix spmv_transposed(const SparseMatrix& s, const Matrix& x);

using FeatureMatrix = Matrix;

inline constexpr int kUnlabeled = -1;

/// Node labels plus disjoint train/val/test masks (node id lists, ascending).
struct LabelSet {
  std::vector<int> labels;
  std::size_t num_classes = 0;
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;

  /// Throws InconsistentCounts when masks overlap, reference unlabeled or
  /// out-of-range nodes, or labels fall outside [0, num_classes).
  void validate(std::size_t n_nodes) const;
};

/// Per-class stratified split by fractions (train, val); the rest is test.
/// Every class with at least one node contributes at least one train node.
LabelSet stratified_split(std::span<const int> labels, std::size_t num_classes,
                          double train_fraction, double val_fraction, SeededRng& rng);

}  // namespace spgcl
