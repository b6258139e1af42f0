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
#include <filesystem>
#include <string>
#include <vector>

#include "spgcl/graph.hpp"
#include "spgcl/rng.hpp"

namespace spgcl {

struct DatasetBundle {
  std::string name;
  SparseGraph graph;
  FeatureMatrix features;
  LabelSet labels;

  /// Throws InconsistentCounts.
  void validate() const;
};

struct LoadReport {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicate_edges_merged = 0;
};

/// Reads edges.csv, features.csv, labels.csv and splits.csv from `dir`.
///
/// edges.csv lines are `src,dst` or `src,dst,weight`; the remaining files have
/// one line per node. Lines starting with '#' and blank lines are ignored.
/// Features are parsed as single precision and widened to double.
/// Throws ParseError (with file and line), InconsistentCounts,
/// UnknownSplitToken or IoError.
DatasetBundle load_dataset(const std::filesystem::path& dir, LoadReport* report = nullptr);

/// Writes the canonical layout. Edge weights are written as a third column
/// when any weight differs from 1 or `always_write_weights` is set. Features
/// are written at single precision.
void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir,
                  bool always_write_weights = false);

struct SbmSpec {
  std::vector<std::size_t> blocks{50, 50};
  double p_intra = 0.5;
  double p_inter = 0.02;
  std::size_t feature_dim = 16;
  /// Block b has mean feature_signal on coordinate b mod feature_dim.
  double feature_signal = 1.0;
  double train_fraction = 0.1;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Planted-partition graph with Gaussian features and a stratified split.
DatasetBundle generate_sbm(const SbmSpec& spec);

/// Removes floor(ratio |E|) edges uniformly; ratio in [0, 1).
SparseGraph inject_noise(const SparseGraph& g, double remove_ratio, SeededRng& rng);

}  // namespace spgcl
