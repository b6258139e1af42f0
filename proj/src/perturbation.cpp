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


#include "spgcl/perturbation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <queue>
#include <string>
#include <unordered_set>

#include "spgcl/error.hpp"
#include "spgcl/kernels.hpp"

namespace spgcl {

std::string_view mode_name(PerturbationMode mode) {
  switch (mode) {
    case PerturbationMode::kSpgcl: return "spgcl";
    case PerturbationMode::kSvdOnly: return "svd_only";
    case PerturbationMode::kEdgeOnly: return "edge_only";
    case PerturbationMode::kSvdThenEdge: return "svd_then_edge";
    case PerturbationMode::kNodeNoise: return "node_noise";
    case PerturbationMode::kEdgeNoise: return "edge_noise";
  }
  return "unknown";
}

PerturbationMode parse_mode(std::string_view name) {
  std::string lowered(name);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (PerturbationMode m : kAllModes) {
    if (mode_name(m) == lowered) return m;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown perturbation mode '" + std::string(name) + "'");
}

void PerturbationPlan::validate() const {
  if (!(p >= 0.0 && p <= 0.5)) {
    throw Error(ErrorCode::kInvalidConfig, "p must lie in [0, 0.5], got " + std::to_string(p));
  }
  if (!std::isfinite(q)) throw Error(ErrorCode::kInvalidConfig, "q must be finite");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "alpha must lie in (0, 1], got " +
                                               std::to_string(alpha));
  }
  if (svd.rank == 0) throw Error(ErrorCode::kInvalidConfig, "svd rank must be >= 1");
  if (!(node_noise_scale >= 0.0) || !std::isfinite(node_noise_scale)) {
    throw Error(ErrorCode::kInvalidConfig, "node_noise_scale must be >= 0");
  }
}

std::size_t ratio_count(double ratio, std::size_t count) {
  const double x = ratio * static_cast<double>(count);
  if (!(x > 0.0)) return 0;
  return static_cast<std::size_t>(std::floor(x + 1e-9));
}

std::size_t compute_P(std::size_t n_edges, double p, double q) {
  return ratio_count(p + q, n_edges);
}

DropResult drop_edges(const SparseGraph& g, double p, SeededRng& rng) {
  const auto all = g.edges();
  const std::size_t k = std::min(ratio_count(p, all.size()), all.size());
  std::vector<std::uint8_t> drop(all.size(), 0);
  for (std::uint64_t idx : rng.sample_without_replacement(all.size(), k)) drop[idx] = 1;

  DropResult out;
  std::vector<Edge> keep;
  keep.reserve(all.size() - k);
  out.removed.reserve(k);
  for (std::size_t i = 0; i < all.size(); ++i) {
    (drop[i] != 0 ? out.removed : keep).push_back(all[i]);
  }
  out.remaining = SparseGraph(g.n_nodes(), std::move(keep));
  return out;
}

std::vector<double> delta_sigma(const TruncatedSVD& svd, std::span<const Edge> removed) {
  const std::size_t r = svd.rank();
  std::vector<double> ds(r, 0.0);
  const std::size_t n = std::min(svd.u.rows(), svd.v.rows());
  for (const Edge& e : removed) {
    if (e.a >= n || e.b >= n) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "removed edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                      ") outside " + std::to_string(n) + " nodes");
    }
    for (std::size_t i = 0; i < r; ++i) {
      ds[i] += e.weight * (svd.u(e.a, i) * svd.v(e.b, i) + svd.u(e.b, i) * svd.v(e.a, i));
    }
  }
  return ds;
}

namespace {

struct WorstOnTop {
  bool operator()(const ScoredPair& x, const ScoredPair& y) const { return ranks_before(x, y); }
};

}  // namespace

std::vector<ScoredPair> top_scored_pairs(const TruncatedSVD& svd, std::span<const double> dsigma,
                                         const SparseGraph& forbidden, std::size_t count,
                                         std::size_t block_bytes) {
  if (count == 0) return {};
  const std::size_t r = svd.rank();
  if (dsigma.size() != r) {
    throw Error(ErrorCode::kLengthMismatch, "delta sigma length does not match rank");
  }
  const std::size_t n = svd.u.rows();
  if (svd.v.rows() != n || forbidden.n_nodes() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "score matrix must be square over the graph");
  }

  std::vector<double> shifted(r);
  for (std::size_t i = 0; i < r; ++i) shifted[i] = svd.sigma[i] + dsigma[i];
  const Matrix us = scale_columns(svd.u, shifted);

  // Neighbour lists of the forbidden graph, for a per-row mask.
  const SparseMatrix adj = adjacency_matrix(forbidden);
  std::vector<std::uint8_t> blocked(n, 0);

  const std::size_t bytes_per_row = 2 * n * sizeof(double);
  const std::size_t block_rows = std::max<std::size_t>(1, block_bytes / std::max<std::size_t>(
                                                                            bytes_per_row, 1));

  std::priority_queue<ScoredPair, std::vector<ScoredPair>, WorstOnTop> heap;
  for (std::size_t begin = 0; begin < n; begin += block_rows) {
    const std::size_t end = std::min(n, begin + block_rows);
    // forward[i][j] = A~[i, j], backward[i][j] = A~[j, i] for i in the block.
    Matrix u_block(end - begin, r);
    Matrix v_block(end - begin, r);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t k = 0; k < r; ++k) {
        u_block(i - begin, k) = us(i, k);
        v_block(i - begin, k) = svd.v(i, k);
      }
    }
    // Only columns j > i are scored, so the products start at column `begin`.
    // Each entry is computed exactly as in the full product.
    const std::size_t width = n - begin;
    Matrix forward(end - begin, width);
    Matrix backward(end - begin, width);
    const auto& kern = kernels::active();
    kern.gemm_nt(u_block.data(), svd.v.data() + begin * r, forward.data(), end - begin, r, width, false);
    kern.gemm_nt(v_block.data(), us.data() + begin * r, backward.data(), end - begin, r, width, false);

    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t e = adj.row_ptr[i]; e < adj.row_ptr[i + 1]; ++e) blocked[adj.col_idx[e]] = 1;
      const std::size_t local = i - begin;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (blocked[j] != 0) continue;
        const double s = (forward(local, j - begin) + backward(local, j - begin)) / 2.0;
        if (!(s > 0.0)) continue;
        const ScoredPair cand{s, static_cast<NodeId>(i), static_cast<NodeId>(j)};
        if (heap.size() < count) {
          heap.push(cand);
        } else if (ranks_before(cand, heap.top())) {
          heap.pop();
          heap.push(cand);
        }
      }
      for (std::size_t e = adj.row_ptr[i]; e < adj.row_ptr[i + 1]; ++e) blocked[adj.col_idx[e]] = 0;
    }
  }

  std::vector<ScoredPair> out;
  out.reserve(heap.size());
  while (!heap.empty()) {
    out.push_back(heap.top());
    heap.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<Edge> score_and_recover(const TruncatedSVD& svd, std::span<const double> dsigma,
                                    const SparseGraph& forbidden, std::size_t count, double alpha,
                                    std::size_t block_bytes) {
  std::vector<Edge> out;
  for (const auto& pair : top_scored_pairs(svd, dsigma, forbidden, count, block_bytes)) {
    out.push_back({pair.a, pair.b, alpha});
  }
  return out;
}

namespace {

SvdConfig clamped_svd(const PerturbationPlan& plan, std::size_t n_nodes) {
  SvdConfig cfg = plan.svd;
  cfg.rank = std::min(cfg.rank, n_nodes);
  cfg.seed = SeededRng::derive_seed(plan.seed, StreamPurpose::kSvdSketch);
  return cfg;
}

SparseGraph merge(const SparseGraph& base, std::span<const Edge> added) {
  std::vector<Edge> edges(base.edges().begin(), base.edges().end());
  edges.insert(edges.end(), added.begin(), added.end());
  return SparseGraph(base.n_nodes(), std::move(edges));
}

// SVD additions scored on `g` itself with zero shift.
std::vector<Edge> svd_additions(const SparseGraph& g, const PerturbationPlan& plan,
                                std::vector<double>& dsigma_out) {
  const std::size_t count = compute_P(g.n_edges(), plan.p, plan.q);
  if (count == 0 || g.n_nodes() == 0) return {};
  const TruncatedSVD svd = randomized_svd(adjacency_matrix(g), clamped_svd(plan, g.n_nodes()));
  dsigma_out.assign(svd.rank(), 0.0);
  return score_and_recover(svd, dsigma_out, g, count, plan.alpha);
}

std::vector<Edge> random_non_edges(const SparseGraph& g, std::size_t count, double weight,
                                   SeededRng& rng) {
  const std::size_t n = g.n_nodes();
  const std::size_t total_pairs = n < 2 ? 0 : n * (n - 1) / 2;
  const std::size_t available = total_pairs - g.n_edges();
  count = std::min(count, available);
  std::vector<Edge> out;
  out.reserve(count);
  std::unordered_set<std::uint64_t> taken;
  if (count * 4 > available) {
    // Dense regime: enumerate the complement and sample from it.
    std::vector<Edge> candidates;
    candidates.reserve(available);
    for (NodeId a = 0; a < n; ++a) {
      for (NodeId b = a + 1; b < n; ++b) {
        if (!g.contains(a, b)) candidates.push_back({a, b, weight});
      }
    }
    for (std::uint64_t idx : rng.sample_without_replacement(candidates.size(), count)) {
      out.push_back(candidates[idx]);
    }
  } else {
    while (out.size() < count) {
      const auto a = static_cast<NodeId>(rng.below(n));
      const auto b = static_cast<NodeId>(rng.below(n));
      if (a == b || g.contains(a, b)) continue;
      if (!taken.insert(edge_key(a, b)).second) continue;
      out.push_back({std::min(a, b), std::max(a, b), weight});
    }
  }
  std::sort(out.begin(), out.end(), [](const Edge& x, const Edge& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  return out;
}

FeatureMatrix add_feature_noise(const FeatureMatrix& x, double scale, SeededRng& rng) {
  FeatureMatrix out = x;
  if (scale == 0.0 || x.rows() == 0) return out;
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  std::vector<double> mean(d, 0.0);
  std::vector<double> sd(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
  }
  for (double& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = x(i, j) - mean[j];
      sd[j] += c * c;
    }
  }
  for (double& s : sd) s = std::sqrt(s / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) out(i, j) += scale * sd[j] * rng.normal();
  }
  return out;
}

}  // namespace

ViewResult make_view(const SparseGraph& g, const FeatureMatrix& x, const PerturbationPlan& plan) {
  plan.validate();
  if (x.rows() != g.n_nodes()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature rows do not match node count");
  }
  SeededRng drop_rng = SeededRng::derive(plan.seed, StreamPurpose::kEdgeDrop);
  ViewResult result;
  PerturbedView& view = result.view;

  switch (plan.mode) {
    case PerturbationMode::kSpgcl: {
      DropResult dropped = drop_edges(g, plan.p, drop_rng);
      const std::size_t count = compute_P(g.n_edges(), plan.p, plan.q);
      if (count > 0 && g.n_nodes() > 0) {
        const TruncatedSVD svd = randomized_svd(adjacency_matrix(dropped.remaining),
                                                clamped_svd(plan, g.n_nodes()));
        view.delta_sigma = delta_sigma(svd, dropped.removed);
        view.added = score_and_recover(svd, view.delta_sigma, dropped.remaining, count, plan.alpha);
      }
      view.graph = merge(dropped.remaining, view.added);
      view.removed = std::move(dropped.removed);
      break;
    }
    case PerturbationMode::kSvdOnly: {
      view.added = svd_additions(g, plan, view.delta_sigma);
      view.graph = merge(g, view.added);
      break;
    }
    case PerturbationMode::kEdgeOnly: {
      DropResult dropped = drop_edges(g, plan.p, drop_rng);
      view.graph = std::move(dropped.remaining);
      view.removed = std::move(dropped.removed);
      break;
    }
    case PerturbationMode::kSvdThenEdge: {
      const std::vector<Edge> additions = svd_additions(g, plan, view.delta_sigma);
      const SparseGraph merged = merge(g, additions);
      DropResult dropped = drop_edges(merged, plan.p, drop_rng);
      for (const Edge& e : dropped.removed) {
        if (g.contains(e.a, e.b)) view.removed.push_back(e);
      }
      for (const Edge& e : additions) {
        if (dropped.remaining.contains(e.a, e.b)) view.added.push_back(e);
      }
      view.graph = std::move(dropped.remaining);
      break;
    }
    case PerturbationMode::kNodeNoise: {
      view.graph = g;
      SeededRng noise_rng = SeededRng::derive(plan.seed, StreamPurpose::kFeatureNoise);
      result.features = add_feature_noise(x, plan.node_noise_scale, noise_rng);
      break;
    }
    case PerturbationMode::kEdgeNoise: {
      DropResult dropped = drop_edges(g, plan.p, drop_rng);
      SeededRng add_rng = SeededRng::derive(plan.seed, StreamPurpose::kEdgeAdd);
      view.added = random_non_edges(g, dropped.removed.size(), plan.alpha, add_rng);
      view.graph = merge(dropped.remaining, view.added);
      view.removed = std::move(dropped.removed);
      break;
    }
  }
  return result;
}

}  // namespace spgcl
