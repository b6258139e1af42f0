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


#include "spgcl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spgcl/error.hpp"
#include "spgcl/kernels.hpp"

namespace spgcl {

namespace {

bool edge_less(const Edge& x, const Edge& y) {
  return x.a != y.a ? x.a < y.a : x.b < y.b;
}

}  // namespace

SparseGraph::SparseGraph(std::size_t n_nodes, std::vector<Edge> edges)
    : n_nodes_(n_nodes), edges_(std::move(edges)) {
  for (auto& e : edges_) {
    if (e.a >= n_nodes_ || e.b >= n_nodes_) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ") with " +
                      std::to_string(n_nodes_) + " nodes");
    }
    if (e.a == e.b) {
      throw Error(ErrorCode::kInconsistentCounts, "self-loop at node " + std::to_string(e.a));
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw Error(ErrorCode::kInconsistentCounts, "edge weight must be positive and finite");
    }
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::sort(edges_.begin(), edges_.end(), edge_less);
  index_.reserve(edges_.size() * 2);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (!index_.emplace(edge_key(edges_[i].a, edges_[i].b), i).second) {
      throw Error(ErrorCode::kInconsistentCounts,
                  "duplicate edge (" + std::to_string(edges_[i].a) + "," +
                      std::to_string(edges_[i].b) + ")");
    }
  }
}

SparseGraph SparseGraph::from_pairs(std::size_t n_nodes,
                                    std::span<const std::pair<NodeId, NodeId>> pairs,
                                    std::size_t* self_loops_dropped) {
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  std::unordered_map<std::uint64_t, bool> seen;
  seen.reserve(pairs.size() * 2);
  std::size_t loops = 0;
  for (const auto& [u, v] : pairs) {
    if (u >= n_nodes || v >= n_nodes) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "edge (" + std::to_string(u) + "," + std::to_string(v) + ") with " +
                      std::to_string(n_nodes) + " nodes");
    }
    if (u == v) {
      ++loops;
      continue;
    }
    if (seen.emplace(edge_key(u, v), true).second) {
      edges.push_back({std::min(u, v), std::max(u, v), 1.0});
    }
  }
  if (self_loops_dropped != nullptr) *self_loops_dropped = loops;
  return SparseGraph(n_nodes, std::move(edges));
}

bool SparseGraph::contains(NodeId a, NodeId b) const {
  return a != b && index_.contains(edge_key(a, b));
}

double SparseGraph::weight(NodeId a, NodeId b) const {
  if (a == b) return 0.0;
  const auto it = index_.find(edge_key(a, b));
  return it == index_.end() ? 0.0 : edges_[it->second].weight;
}

std::vector<double> SparseGraph::degrees() const {
  std::vector<double> deg(n_nodes_, 0.0);
  for (const auto& e : edges_) {
    deg[e.a] += e.weight;
    deg[e.b] += e.weight;
  }
  return deg;
}

// ---------------------------------------------------------------------------
// SparseMatrix

Matrix SparseMatrix::to_dense() const {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) m(i, col_idx[e]) = values[e];
  }
  return m;
}

SparseMatrix SparseMatrix::transposed() const {
  SparseMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (NodeId c : col_idx) ++t.row_ptr[c + 1];
  for (std::size_t i = 0; i < cols; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.col_idx.resize(nnz());
  t.values.resize(nnz());
  std::vector<std::size_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
  // Row-major traversal keeps each transposed row's columns sorted.
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) {
      const std::size_t slot = cursor[col_idx[e]]++;
      t.col_idx[slot] = static_cast<NodeId>(i);
      t.values[slot] = values[e];
    }
  }
  return t;
}

bool SparseMatrix::is_symmetric() const {
  if (rows != cols) return false;
  const SparseMatrix t = transposed();
  return t.row_ptr == row_ptr && t.col_idx == col_idx && t.values == values;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  SparseMatrix m;
  m.rows = m.cols = n;
  m.row_ptr.resize(n + 1);
  m.col_idx.resize(n);
  m.values.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.row_ptr[i + 1] = i + 1;
    m.col_idx[i] = static_cast<NodeId>(i);
  }
  return m;
}

SparseMatrix SparseMatrix::from_dense(const Matrix& d) {
  SparseMatrix m;
  m.rows = d.rows();
  m.cols = d.cols();
  m.row_ptr.assign(1, 0);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      if (d(i, j) != 0.0) {
        m.col_idx.push_back(static_cast<NodeId>(j));
        m.values.push_back(d(i, j));
      }
    }
    m.row_ptr.push_back(m.values.size());
  }
  return m;
}

namespace {

// Builds a symmetric CSR from canonical edges: entry (a,b) and (b,a) both
// receive value_of(edge), plus an optional diagonal.
template <typename ValueFn>
SparseMatrix symmetric_csr(const SparseGraph& g, const std::vector<double>* diagonal,
                           ValueFn value_of) {
  const std::size_t n = g.n_nodes();
  SparseMatrix m;
  m.rows = m.cols = n;
  m.row_ptr.assign(n + 1, 0);
  for (const auto& e : g.edges()) {
    ++m.row_ptr[e.a + 1];
    ++m.row_ptr[e.b + 1];
  }
  if (diagonal != nullptr) {
    for (std::size_t i = 0; i < n; ++i) ++m.row_ptr[i + 1];
  }
  for (std::size_t i = 0; i < n; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  m.col_idx.resize(m.row_ptr[n]);
  m.values.resize(m.row_ptr[n]);

  // Per row: lower neighbours (ascending), then diagonal, then upper
  // neighbours (ascending). Canonical edge order delivers exactly that when
  // lower entries are filled during a pass sorted by (b, a).
  std::vector<std::size_t> cursor(m.row_ptr.begin(), m.row_ptr.end() - 1);
  std::vector<const Edge*> by_b;
  by_b.reserve(g.n_edges());
  for (const auto& e : g.edges()) by_b.push_back(&e);
  std::stable_sort(by_b.begin(), by_b.end(),
                   [](const Edge* x, const Edge* y) { return x->b < y->b; });
  // Lower entries of row r are edges (a, r) with a < r; visiting edges sorted
  // by b (stable on a) yields them ascending.
  for (const Edge* e : by_b) {
    const std::size_t slot = cursor[e->b]++;
    m.col_idx[slot] = e->a;
    m.values[slot] = value_of(*e);
  }
  if (diagonal != nullptr) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t slot = cursor[i]++;
      m.col_idx[slot] = static_cast<NodeId>(i);
      m.values[slot] = (*diagonal)[i];
    }
  }
  for (const auto& e : g.edges()) {
    const std::size_t slot = cursor[e.a]++;
    m.col_idx[slot] = e.b;
    m.values[slot] = value_of(e);
  }
  return m;
}

}  // namespace

SparseMatrix adjacency_matrix(const SparseGraph& g) {
  return symmetric_csr(g, nullptr, [](const Edge& e) { return e.weight; });
}

SparseMatrix normalize_adjacency(const SparseGraph& g) {
  std::vector<double> deg = g.degrees();
  std::vector<double> inv_sqrt(deg.size());
  std::vector<double> diag(deg.size());
  for (std::size_t i = 0; i < deg.size(); ++i) {
    const double d = deg[i] + 1.0;
    inv_sqrt[i] = 1.0 / std::sqrt(d);
    diag[i] = 1.0 / d;
  }
  return symmetric_csr(g, &diag, [&](const Edge& e) {
    return e.weight * (inv_sqrt[e.a] * inv_sqrt[e.b]);
  });
}

Matrix to_dense(const SparseGraph& g, std::size_t cap) {
  if (g.n_nodes() > cap) {
    throw Error(ErrorCode::kCapExceeded, std::to_string(g.n_nodes()) +
                                             " nodes exceeds dense cap " + std::to_string(cap));
  }
  Matrix m(g.n_nodes(), g.n_nodes());
  for (const auto& e : g.edges()) {
    m(e.a, e.b) = e.weight;
    m(e.b, e.a) = e.weight;
  }
  return m;
}

SparseGraph graph_from_dense(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "adjacency must be square");
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (m(i, i) != 0.0) throw Error(ErrorCode::kInconsistentCounts, "nonzero diagonal");
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      if (m(i, j) != m(j, i)) throw Error(ErrorCode::kInconsistentCounts, "asymmetric input");
      if (m(i, j) != 0.0) {
        edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), m(i, j)});
      }
    }
  }
  return SparseGraph(m.rows(), std::move(edges));
}

Matrix spmv(const SparseMatrix& s, const Matrix& x) {
  if (s.cols != x.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "spmv: sparse " + std::to_string(s.rows) + "x" + std::to_string(s.cols) +
                    " times dense " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }
  Matrix y(s.rows, x.cols());
  kernels::active().spmm(s.row_ptr.data(), s.col_idx.data(), s.values.data(), s.rows, x.data(),
                         y.data(), x.cols());
  return y;
}

Matrix spmv_transposed(const SparseMatrix& s, const Matrix& x) {
  if (s.rows != x.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "spmv_transposed: row count mismatch");
  }
  Matrix y(s.cols, x.cols());
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < s.rows; ++i) {
    const double* xrow = x.data() + i * x.cols();
    for (std::size_t e = s.row_ptr[i]; e < s.row_ptr[i + 1]; ++e) {
      k.axpy(s.values[e], xrow, y.data() + static_cast<std::size_t>(s.col_idx[e]) * x.cols(),
             x.cols());
    }
  }
  return y;
}

// ---------------------------------------------------------------------------
// Labels

void LabelSet::validate(std::size_t n_nodes) const {
  if (labels.size() != n_nodes) {
    throw Error(ErrorCode::kInconsistentCounts,
                "label count " + std::to_string(labels.size()) + " != node count " +
                    std::to_string(n_nodes));
  }
  for (int y : labels) {
    if (y != kUnlabeled && (y < 0 || static_cast<std::size_t>(y) >= num_classes)) {
      throw Error(ErrorCode::kInconsistentCounts, "label " + std::to_string(y) + " out of range");
    }
  }
  std::vector<std::uint8_t> owner(n_nodes, 0);
  auto mark = [&](const std::vector<NodeId>& mask, std::uint8_t tag, const char* name) {
    for (NodeId v : mask) {
      if (v >= n_nodes) {
        throw Error(ErrorCode::kInconsistentCounts,
                    std::string(name) + " mask references node " + std::to_string(v));
      }
      if (owner[v] != 0) {
        throw Error(ErrorCode::kInconsistentCounts,
                    "node " + std::to_string(v) + " appears in more than one mask");
      }
      if (labels[v] == kUnlabeled) {
        throw Error(ErrorCode::kInconsistentCounts,
                    std::string(name) + " node " + std::to_string(v) + " has no label");
      }
      owner[v] = tag;
    }
  };
  mark(train, 1, "train");
  mark(val, 2, "val");
  mark(test, 3, "test");
}

LabelSet stratified_split(std::span<const int> labels, std::size_t num_classes,
                          double train_fraction, double val_fraction, SeededRng& rng) {
  LabelSet out;
  out.labels.assign(labels.begin(), labels.end());
  out.num_classes = num_classes;
  std::vector<std::vector<NodeId>> by_class(num_classes);
  for (std::size_t v = 0; v < labels.size(); ++v) {
    if (labels[v] != kUnlabeled) by_class[static_cast<std::size_t>(labels[v])].push_back(
        static_cast<NodeId>(v));
  }
  for (auto& members : by_class) {
    if (members.empty()) continue;
    const auto order = rng.sample_without_replacement(members.size(), members.size());
    const auto n = static_cast<double>(members.size());
    std::size_t n_train = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                                       train_fraction * n)));
    n_train = std::min(n_train, members.size());
    std::size_t n_val = static_cast<std::size_t>(std::floor(val_fraction * n));
    n_val = std::min(n_val, members.size() - n_train);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const NodeId v = members[order[i]];
      if (i < n_train) {
        out.train.push_back(v);
      } else if (i < n_train + n_val) {
        out.val.push_back(v);
      } else {
        out.test.push_back(v);
      }
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace spgcl
