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

#include <algorithm>
#include <cmath>
#include <set>

#include "spgcl/dataset.hpp"
#include "spgcl/error.hpp"
#include "spgcl/perturbation.hpp"
#include "test_util.hpp"

using namespace spgcl;
using namespace spgcl::testing;

namespace {

/// Dense brute force: materialize A~ in full, score every pair, sort.
std::vector<ScoredPair> brute_force_top(const TruncatedSVD& svd, std::span<const double> dsigma,
                                        const SparseGraph& forbidden, std::size_t count) {
  std::vector<double> s(svd.sigma);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] += dsigma[i];
  const Matrix a = reconstruct(svd, s);
  std::vector<ScoredPair> all;
  for (NodeId i = 0; i < a.rows(); ++i)
    for (NodeId j = i + 1; j < a.rows(); ++j) {
      const double score = (a(i, j) + a(j, i)) / 2.0;
      if (score > 0.0 && !forbidden.contains(i, j)) all.push_back({score, i, j});
    }
  std::sort(all.begin(), all.end(), ranks_before);
  if (all.size() > count) all.resize(count);
  return all;
}

bool same_pairs(const std::vector<ScoredPair>& x, const std::vector<ScoredPair>& y) {
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i].score != y[i].score || x[i].a != y[i].a || x[i].b != y[i].b) return false;
  return true;
}

double top_sigma(const SparseGraph& g) { return exact_svd(to_dense(g)).sigma[0]; }

}  // namespace

TEST_SUITE("perturbation") {
  TEST_CASE("drop_edges removes exactly floor(p |E|) edges") {
    SeededRng rng(31);
    const SparseGraph g = random_graph(20, 0.3, rng);
    const DropResult none = drop_edges(g, 0.0, rng);
    CHECK(none.removed.empty());
    CHECK(none.remaining == g);

    const SparseGraph big = graph_with_edge_count(2708, 5429, rng);
    CHECK(drop_edges(big, 0.02, rng).removed.size() == 108);

    const SparseGraph ten = graph_with_edge_count(8, 10, rng);
    const DropResult half = drop_edges(ten, 0.5, rng);
    CHECK(half.removed.size() == 5);
    CHECK(half.remaining.n_edges() == 5);
    for (const Edge& e : ten.edges()) {
      const bool in_removed = std::any_of(half.removed.begin(), half.removed.end(),
                                          [&](const Edge& r) { return r.a == e.a && r.b == e.b; });
      CHECK(in_removed != half.remaining.contains(e.a, e.b));
    }
  }

  TEST_CASE("equal seeds give bit-identical drops") {
    SeededRng g_rng(32);
    const SparseGraph g = random_graph(40, 0.2, g_rng);
    SeededRng a(5), b(5);
    const DropResult x = drop_edges(g, 0.2, a);
    const DropResult y = drop_edges(g, 0.2, b);
    CHECK(x.removed == y.removed);
    CHECK(x.remaining == y.remaining);
  }

  TEST_CASE("compute_P examples") {
    CHECK(compute_P(5429, 0.02, 0.01) == 162);
    CHECK(compute_P(5429, 0.0, 0.0) == 0);
    CHECK(compute_P(5429, 0.001, -0.004) == 0);
    CHECK(ratio_count(0.29, 100) == 29);
    CHECK(ratio_count(0.3, 5429) == 1628);
  }

  TEST_CASE("delta_sigma: empty, single edge, range check") {
    SeededRng rng(33);
    const SparseGraph g = random_graph(12, 0.4, rng);
    SvdConfig cfg;
    cfg.rank = 3;
    const TruncatedSVD svd = randomized_svd(adjacency_matrix(g), cfg);
    CHECK(delta_sigma(svd, {}) == std::vector<double>(3, 0.0));
    const std::vector<Edge> one{{2, 7, 1.0}};
    const auto d = delta_sigma(svd, one);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(d[i] == doctest::Approx(svd.u(2, i) * svd.v(7, i) + svd.u(7, i) * svd.v(2, i)).epsilon(1e-14));
    }
    const std::vector<Edge> bad{{2, 12, 1.0}};
    CHECK_THROWS_AS(delta_sigma(svd, bad), Error);
  }

  TEST_CASE("delta_sigma is first-order accurate for a single-edge shift") {
    SeededRng rng(34);
    SparseGraph g;
    do {
      g = random_graph(30, 0.2, rng);
      const auto s = exact_svd(to_dense(g)).sigma;
      if (s[0] - s[1] > 0.1) break;
    } while (true);
    // An absent pair, so A_R + eps * M stays a valid weighted graph.
    NodeId a = 0, b = 1;
    while (g.contains(a, b)) ++b;
    const TruncatedSVD svd = truncate(exact_svd(to_dense(g)), 1);
    const double s0 = top_sigma(g);
    double prev_err = 0.0;
    for (double eps : {1e-2, 5e-3, 2.5e-3}) {
      std::vector<Edge> edges(g.edges().begin(), g.edges().end());
      edges.push_back({a, b, eps});
      std::sort(edges.begin(), edges.end(), [](auto& x, auto& y) { return edge_key(x.a, x.b) < edge_key(y.a, y.b); });
      const double actual = top_sigma(SparseGraph(30, edges)) - s0;
      const std::vector<Edge> shift{{a, b, eps}};
      const double err = std::abs(delta_sigma(svd, shift)[0] - actual);
      CHECK(err < 10 * eps * eps);
      if (prev_err > 0.0) {
        CHECK(prev_err / err > 3.0);
        CHECK(prev_err / err < 5.0);
      }
      prev_err = err;
    }
  }

  TEST_CASE("score_and_recover: P = 0 and a dropped clique edge ranks first") {
    std::vector<Edge> edges;
    for (NodeId i = 0; i < 6; ++i)
      for (NodeId j = i + 1; j < 6; ++j)
        if (!(i == 1 && j == 2)) edges.push_back({i, j, 1.0});
    edges.push_back({6, 7, 1.0});
    edges.push_back({8, 9, 1.0});
    const SparseGraph remaining(10, edges);
    SvdConfig cfg;
    cfg.rank = 2;
    const TruncatedSVD svd = randomized_svd(adjacency_matrix(remaining), cfg);
    const std::vector<Edge> removed{{1, 2, 1.0}};
    const auto ds = delta_sigma(svd, removed);
    CHECK(score_and_recover(svd, ds, remaining, 0, 1.0).empty());
    const auto brute = brute_force_top(svd, ds, remaining, 1);
    REQUIRE(brute.size() == 1);
    CHECK(brute[0].a == 1);
    CHECK(brute[0].b == 2);
    const auto added = score_and_recover(svd, ds, remaining, 1, 0.7);
    REQUIRE(added.size() == 1);
    CHECK(added[0] == Edge{1, 2, 0.7});
  }

  TEST_CASE("bit-equal scores break ties lexicographically") {
    TruncatedSVD svd;
    svd.u = Matrix(5, 1, 1.0 / std::sqrt(5.0));
    svd.v = svd.u;
    svd.sigma = {1.0};
    const std::vector<double> zero{0.0};
    const auto top = top_scored_pairs(svd, zero, SparseGraph(5, {{0, 1, 1.0}}), 3);
    REQUIRE(top.size() == 3);
    CHECK((top[0].a == 0 && top[0].b == 2));
    CHECK((top[1].a == 0 && top[1].b == 3));
    CHECK((top[2].a == 0 && top[2].b == 4));
  }

  TEST_CASE("fewer than P returned when positive candidates run out") {
    TruncatedSVD svd;
    svd.u = Matrix{{1.0}, {0.0}, {0.0}, {0.0}};
    svd.v = Matrix{{0.0}, {1.0}, {0.0}, {0.0}};
    svd.sigma = {1.0};
    const std::vector<double> zero{0.0};
    const auto top = top_scored_pairs(svd, zero, SparseGraph(4, {}), 5);
    REQUIRE(top.size() == 1);
    CHECK((top[0].a == 0 && top[0].b == 1 && top[0].score == 0.5));
  }

  TEST_CASE("block-row scoring equals dense brute force exactly") {
    SeededRng rng(35);
    for (int t = 0; t < 10; ++t) {
      const std::size_t n = 20 + rng.below(81);
      const SparseGraph g = random_graph(n, 0.1, rng);
      SvdConfig cfg;
      cfg.rank = 1 + rng.below(10);
      cfg.seed = t;
      const TruncatedSVD svd = randomized_svd(adjacency_matrix(g), cfg);
      std::vector<double> ds(svd.rank());
      for (double& d : ds) d = 0.1 * rng.normal();
      const std::size_t count = rng.below(3 * g.n_edges() + 1);
      const auto brute = brute_force_top(svd, ds, g, count);
      for (std::size_t block : {std::size_t{1}, std::size_t{8 * 7 * n}, kScoreBlockBytes}) {
        CHECK(same_pairs(top_scored_pairs(svd, ds, g, count, block), brute));
      }
    }
  }

  TEST_CASE("make_view: EdgeOnly with p = 0 and NodeNoise with zero scale are identities") {
    SeededRng rng(36);
    const SparseGraph g = random_graph(25, 0.2, rng);
    const Matrix x = random_matrix(25, 4, rng);
    PerturbationPlan plan;
    plan.mode = PerturbationMode::kEdgeOnly;
    plan.p = 0.0;
    const ViewResult v = make_view(g, x, plan);
    CHECK(v.view.graph == g);
    CHECK(v.view.removed.empty());
    CHECK(v.view.added.empty());
    CHECK_FALSE(v.features.has_value());

    plan.mode = PerturbationMode::kNodeNoise;
    plan.node_noise_scale = 0.0;
    const ViewResult nv = make_view(g, x, plan);
    CHECK(nv.view.graph == g);
    CHECK((!nv.features || *nv.features == x));

    plan.node_noise_scale = 0.1;
    const ViewResult noisy = make_view(g, x, plan);
    REQUIRE(noisy.features.has_value());
    CHECK(*noisy.features != x);
  }

  TEST_CASE("make_view invariants hold for every mode") {
    SeededRng rng(37);
    for (int t = 0; t < 12; ++t) {
      const SparseGraph g = random_graph(30 + rng.below(30), 0.15, rng);
      const Matrix x = random_matrix(g.n_nodes(), 3, rng);
      for (PerturbationMode mode : kAllModes) {
        PerturbationPlan plan;
        plan.mode = mode;
        plan.p = 0.05 + 0.1 * rng.uniform();
        plan.q = 0.05 * rng.uniform() - 0.01;
        plan.alpha = 0.5;
        plan.svd.rank = 6;
        plan.seed = rng.next_u64();
        const PerturbedView v = make_view(g, x, plan).view;
        const auto in = [](std::span<const Edge> list, const Edge& e) {
          return std::any_of(list.begin(), list.end(), [&](const Edge& f) { return f.a == e.a && f.b == e.b; });
        };
        // A dropped edge may come back through recovery; it then appears in
        // both lists and carries weight alpha.
        for (const Edge& e : v.removed) {
          CHECK(g.contains(e.a, e.b));
          CHECK(v.graph.contains(e.a, e.b) == in(v.added, e));
        }
        for (const Edge& e : v.added) {
          CHECK(e.a < e.b);
          CHECK(g.contains(e.a, e.b) == in(v.removed, e));
          CHECK(v.graph.weight(e.a, e.b) == 0.5);
        }
        CHECK(v.graph.n_edges() == g.n_edges() - v.removed.size() + v.added.size());
        if (mode == PerturbationMode::kSpgcl || mode == PerturbationMode::kSvdOnly) {
          CHECK(v.added.size() <= compute_P(g.n_edges(), plan.p, plan.q));
        }
        if (mode == PerturbationMode::kEdgeNoise) CHECK(v.added.size() == v.removed.size());
        const PerturbedView again = make_view(g, x, plan).view;
        CHECK(again.graph == v.graph);
        CHECK(again.delta_sigma == v.delta_sigma);
      }
    }
  }

  TEST_CASE("SvdOnly leaves the original edges in place") {
    SeededRng rng(38);
    const SparseGraph g = random_graph(40, 0.15, rng);
    PerturbationPlan plan;
    plan.mode = PerturbationMode::kSvdOnly;
    plan.svd.rank = 5;
    const PerturbedView v = make_view(g, Matrix(40, 2), plan).view;
    CHECK(v.removed.empty());
    for (const Edge& e : g.edges()) CHECK(v.graph.contains(e.a, e.b));
    CHECK(v.delta_sigma == std::vector<double>(5, 0.0));
  }

  TEST_CASE("SBM recovery: low-rank scores restore or stay intra-block") {
    double restored = 0.0, intra = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
      SbmSpec spec;
      spec.blocks = {20, 20};
      spec.p_intra = 0.5;
      spec.p_inter = 0.02;
      spec.seed = 1000 + s;
      const DatasetBundle b = generate_sbm(spec);
      std::vector<Edge> intra_edges;
      for (const Edge& e : b.graph.edges())
        if (b.labels.labels[e.a] == b.labels.labels[e.b]) intra_edges.push_back(e);
      SeededRng rng(s);
      const std::size_t k = ratio_count(0.05, intra_edges.size());
      std::set<std::uint64_t> dropped;
      for (auto i : rng.sample_without_replacement(intra_edges.size(), k))
        dropped.insert(edge_key(intra_edges[i].a, intra_edges[i].b));
      std::vector<Edge> kept, removed;
      for (const Edge& e : b.graph.edges()) (dropped.count(edge_key(e.a, e.b)) ? removed : kept).push_back(e);
      const SparseGraph remaining(40, kept);
      SvdConfig cfg;
      cfg.rank = 2;  // one component per block
      const TruncatedSVD svd = randomized_svd(adjacency_matrix(remaining), cfg);
      const auto added = score_and_recover(svd, delta_sigma(svd, removed), remaining, k, 1.0);
      std::size_t hit = 0, same_block = 0;
      for (const Edge& e : added) {
        hit += dropped.count(edge_key(e.a, e.b));
        same_block += b.labels.labels[e.a] == b.labels.labels[e.b];
      }
      restored += static_cast<double>(hit) / k;
      intra += added.empty() ? 0.0 : static_cast<double>(same_block) / added.size();
    }
    restored /= seeds;
    intra /= seeds;
    MESSAGE("restored " << restored << ", intra-block " << intra);
    CHECK((restored >= 0.6 || intra >= 0.8));
  }
}
