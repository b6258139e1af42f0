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


#include <doctest.h>

#include <cmath>
#include <numeric>

#include "spgcl/error.hpp"
#include "spgcl/graph.hpp"
#include "test_util.hpp"

using namespace spgcl;
using namespace spgcl::testing;

TEST_SUITE("graph") {
  TEST_CASE("normalize_adjacency: single node and single edge") {
    CHECK(normalize_adjacency(SparseGraph(1, {})).to_dense() == Matrix{{1.0}});
    const Matrix two = normalize_adjacency(SparseGraph(2, {{0, 1, 1.0}})).to_dense();
    CHECK(max_abs_diff(two, Matrix{{0.5, 0.5}, {0.5, 0.5}}) < 1e-15);
  }

  TEST_CASE("normalize_adjacency: 3-node path, derived by hand") {
    // A + I = [[1,1,0],[1,1,1],[0,1,1]], degrees (2,3,2):
    // S = [[1/2, 1/sqrt6, 0], [1/sqrt6, 1/3, 1/sqrt6], [0, 1/sqrt6, 1/2]].
    const double r6 = 1.0 / std::sqrt(6.0);
    const Matrix expected{{0.5, r6, 0.0}, {r6, 1.0 / 3.0, r6}, {0.0, r6, 0.5}};
    const SparseMatrix s = normalize_adjacency(SparseGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}}));
    CHECK(max_abs_diff(s.to_dense(), expected) < 1e-15);
    CHECK(s.nnz() == 7);
  }

  TEST_CASE("normalize_adjacency is exactly symmetric and uses weighted degrees") {
    SeededRng rng(11);
    std::vector<Edge> edges;
    const SparseGraph base = random_graph(60, 0.1, rng);
    for (const Edge& e : base.edges()) edges.push_back({e.a, e.b, rng.uniform(0.1, 2.0)});
    const SparseGraph g(60, edges);
    const Matrix s = normalize_adjacency(g).to_dense();
    CHECK(s == s.transposed());
    const auto deg = g.degrees();
    for (const Edge& e : g.edges()) {
      CHECK(std::abs(s(e.a, e.b) - e.weight / std::sqrt((deg[e.a] + 1) * (deg[e.b] + 1))) < 1e-15);
    }
  }

  TEST_CASE("k-regular graph: every off-diagonal nonzero is 1/(k+1)") {
    std::vector<Edge> edges;  // 8-cycle plus chords i -> i+4 makes it 3-regular
    for (NodeId i = 0; i < 8; ++i) edges.push_back({std::min<NodeId>(i, (i + 1) % 8), std::max<NodeId>(i, (i + 1) % 8), 1.0});
    for (NodeId i = 0; i < 4; ++i) edges.push_back({i, i + 4, 1.0});
    std::sort(edges.begin(), edges.end(), [](auto& x, auto& y) { return edge_key(x.a, x.b) < edge_key(y.a, y.b); });
    const SparseMatrix s = normalize_adjacency(SparseGraph(8, edges));
    for (std::size_t r = 0; r < s.rows; ++r) {
      for (std::size_t k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k) {
        CHECK(std::abs(s.values[k] - 0.25) < 1e-15);
      }
    }
  }

  TEST_CASE("to_dense examples and cap") {
    CHECK(to_dense(SparseGraph(2, {})) == Matrix(2, 2));
    CHECK(to_dense(SparseGraph(2, {{0, 1, 0.5}})) == Matrix{{0.0, 0.5}, {0.5, 0.0}});
    CHECK_THROWS_AS(to_dense(SparseGraph(5, {}), 4), Error);
    try {
      to_dense(SparseGraph(5, {}), 4);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kCapExceeded);
    }
  }

  TEST_CASE("to_dense then re-sparsify is the identity; degree sum is 2|E|") {
    SeededRng rng(12);
    for (int t = 0; t < 10; ++t) {
      const SparseGraph g = random_graph(30, 0.15, rng);
      CHECK(graph_from_dense(to_dense(g)) == g);
      const auto deg = g.degrees();
      CHECK(std::accumulate(deg.begin(), deg.end(), 0.0) == 2.0 * g.n_edges());
      CHECK(adjacency_matrix(g).nnz() == 2 * g.n_edges());
    }
  }

  TEST_CASE("spmv: identity, zero, and a dense oracle") {
    SeededRng rng(13);
    const Matrix x = random_matrix(5, 3, rng);
    CHECK(spmv(SparseMatrix::identity(5), x) == x);
    SparseMatrix zero;
    zero.rows = zero.cols = 5;
    zero.row_ptr.assign(6, 0);
    CHECK(spmv(zero, x) == Matrix(5, 3));
    Matrix dense = random_matrix(5, 5, rng);
    for (double& v : dense.values()) if (rng.uniform() < 0.5) v = 0.0;
    const SparseMatrix s = SparseMatrix::from_dense(dense);
    CHECK(max_abs_diff(spmv(s, x), naive_matmul(dense, x)) < 1e-14);
    CHECK(max_abs_diff(spmv_transposed(s, x), naive_matmul(dense.transposed(), x)) < 1e-14);
    CHECK_THROWS_AS(spmv(s, random_matrix(4, 3, rng)), Error);
  }

  TEST_CASE("strict constructor rejects invalid edge sets") {
    CHECK_THROWS_AS(SparseGraph(2, {{0, 2, 1.0}}), Error);
    CHECK_THROWS_AS(SparseGraph(3, {{1, 1, 1.0}}), Error);
    CHECK_THROWS_AS(SparseGraph(3, {{0, 1, 1.0}, {0, 1, 1.0}}), Error);
    CHECK_THROWS_AS(SparseGraph(3, {{0, 1, 0.0}}), Error);
  }

  TEST_CASE("from_pairs dedups reversed pairs and drops self-loops") {
    const std::vector<std::pair<NodeId, NodeId>> pairs{{1, 2}, {2, 1}, {3, 3}, {0, 3}};
    std::size_t loops = 0;
    const SparseGraph g = SparseGraph::from_pairs(4, pairs, &loops);
    CHECK(g.n_edges() == 2);
    CHECK(loops == 1);
    CHECK(g.contains(2, 1));
    CHECK(g.contains(3, 0));
    CHECK_FALSE(g.contains(3, 3));
  }

  TEST_CASE("stratified split: disjoint masks, every class trained") {
    std::vector<int> labels;
    for (int c = 0; c < 4; ++c) labels.insert(labels.end(), 10 + 5 * c, c);
    SeededRng rng(14);
    const LabelSet ls = stratified_split(labels, 4, 0.1, 0.2, rng);
    ls.validate(labels.size());
    CHECK(ls.train.size() + ls.val.size() + ls.test.size() == labels.size());
    std::vector<int> trained(4, 0);
    for (NodeId v : ls.train) ++trained[ls.labels[v]];
    for (int c : trained) CHECK(c >= 1);

    LabelSet bad = ls;
    bad.val.push_back(bad.train.front());
    CHECK_THROWS_AS(bad.validate(labels.size()), Error);
  }
}
