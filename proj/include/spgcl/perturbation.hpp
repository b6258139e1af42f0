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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "spgcl/graph.hpp"
#include "spgcl/rng.hpp"
#include "spgcl/svd.hpp"

namespace spgcl {

enum class PerturbationMode {
  kSpgcl,        // drop, then SVD-guided top-P recovery
  kSvdOnly,      // top-P additions scored on the intact graph
  kEdgeOnly,     // random drop only
  kSvdThenEdge,  // SVD additions, then random drop on the merged graph
  kNodeNoise,    // Gaussian feature noise, graph unchanged
  kEdgeNoise,    // random drop plus the same number of random non-edges
};

std::string_view mode_name(PerturbationMode mode);
/// Accepts the names produced by mode_name (case-insensitive). Throws
/// InvalidConfig otherwise.
PerturbationMode parse_mode(std::string_view name);
inline constexpr PerturbationMode kAllModes[] = {
    PerturbationMode::kSpgcl,       PerturbationMode::kSvdOnly,   PerturbationMode::kEdgeOnly,
    PerturbationMode::kSvdThenEdge, PerturbationMode::kNodeNoise, PerturbationMode::kEdgeNoise,
};

struct PerturbationPlan {
  double p = 0.02;
  double q = 0.01;
  double alpha = 1.0;
  SvdConfig svd{};
  PerturbationMode mode = PerturbationMode::kSpgcl;
  std::uint64_t seed = 0;
  /// NodeNoise standard deviation as a fraction of each feature's std.
  double node_noise_scale = 0.1;

  /// Throws InvalidConfig.
  void validate() const;
};

/// One augmented view. `graph` is A_E; `removed` lists original edges absent
/// from A_E; `added` lists non-original-support edges carrying weight alpha.
struct PerturbedView {
  SparseGraph graph;
  std::vector<Edge> removed;
  std::vector<Edge> added;
  std::vector<double> delta_sigma;
};

struct DropResult {
  SparseGraph remaining;
  std::vector<Edge> removed;  // canonical order
};

/// floor(x * count) for decimal ratios; a 1e-9 guard keeps products such as
/// 0.29 * 100 from flooring to 28.
std::size_t ratio_count(double ratio, std::size_t count);

/// Removes exactly floor(p |E|) edges sampled uniformly without replacement.
DropResult drop_edges(const SparseGraph& g, double p, SeededRng& rng);

/// First-order singular value shifts u_i^T dA v_i, where dA holds the removed
/// edges symmetrically with their weights. Throws IndexOutOfRange.
std::vector<double> delta_sigma(const TruncatedSVD& svd, std::span<const Edge> removed);

/// max(floor((p + q) |E|), 0).
std::size_t compute_P(std::size_t n_edges, double p, double q);

struct ScoredPair {
  double score = 0.0;
  NodeId a = 0;
  NodeId b = 0;
};

/// Strict ranking used for top-P selection: higher score first, then
/// lexicographically smaller (a, b).
inline bool ranks_before(const ScoredPair& x, const ScoredPair& y) {
  if (x.score != y.score) return x.score > y.score;
  if (x.a != y.a) return x.a < y.a;
  return x.b < y.b;
}

inline constexpr std::size_t kScoreBlockBytes = std::size_t{256} << 20;

/// Top-P positive-score pairs (a < b) of the symmetrized score matrix
/// (A~ + A~^T) / 2, A~ = sum_i (sigma_i + dsigma_i) u_i v_i^T, skipping pairs
/// present in `forbidden`. A~ is streamed in row blocks of at most
/// `block_bytes`. Returned best-first.
std::vector<ScoredPair> top_scored_pairs(const TruncatedSVD& svd, std::span<const double> dsigma,
                                         const SparseGraph& forbidden, std::size_t count,
                                         std::size_t block_bytes = kScoreBlockBytes);

/// top_scored_pairs as weighted edges with weight alpha.
std::vector<Edge> score_and_recover(const TruncatedSVD& svd, std::span<const double> dsigma,
                                    const SparseGraph& forbidden, std::size_t count, double alpha,
                                    std::size_t block_bytes = kScoreBlockBytes);

struct ViewResult {
  PerturbedView view;
  /// Perturbed features; nullopt when the mode leaves features untouched.
  std::optional<FeatureMatrix> features;
};

/// Builds one augmented view according to plan.mode. Deterministic in
/// (g, x, plan). The SVD rank is clamped to the node count.
ViewResult make_view(const SparseGraph& g, const FeatureMatrix& x, const PerturbationPlan& plan);

}  // namespace spgcl
