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

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace spgcl {

/// Purposes for independent random streams derived from one base seed.
enum class StreamPurpose : std::uint64_t {
  kEdgeDrop = 1,
  kWeightInit = 2,
  kSvdSketch = 3,
  kFeatureNoise = 4,
  kEdgeAdd = 5,
  kSbm = 6,
  kSplit = 7,
  kCorruption = 8,
  kDropout = 9,
  kRun = 10,
  kGradcheck = 11,
};

/// xoshiro256** seeded through splitmix64.
///
/// Every draw is defined on integer arithmetic only (no std::*_distribution),
/// so a given seed yields the same sequence on every platform. Streams for
/// different purposes are obtained with `derive`, which hashes
/// (seed, purpose, index) through splitmix64 into a fresh 256-bit state.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  /// Independent stream keyed by (seed, purpose, index).
  static SeededRng derive(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index = 0);
  static std::uint64_t derive_seed(std::uint64_t seed, StreamPurpose purpose,
                                   std::uint64_t index = 0);

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Unbiased integer on [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller; caches the second variate.
  double normal();
  bool bernoulli(double prob);

  /// k distinct indices from [0, n), sampled uniformly without replacement,
  /// returned in the order drawn (partial Fisher-Yates).
  std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k);

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace spgcl
