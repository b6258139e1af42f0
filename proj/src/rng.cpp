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


#include "spgcl/rng.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>

namespace spgcl {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& word : state_) word = splitmix64(sm);
}

std::uint64_t SeededRng::derive_seed(std::uint64_t seed, StreamPurpose purpose,
                                     std::uint64_t index) {
  std::uint64_t sm = seed;
  std::uint64_t h = splitmix64(sm);
  sm = h ^ (static_cast<std::uint64_t>(purpose) * 0xD1B54A32D192ED03ULL);
  h = splitmix64(sm);
  sm = h ^ (index * 0x8CB92BA72F3D8DD7ULL);
  return splitmix64(sm);
}

SeededRng SeededRng::derive(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) {
  return SeededRng(derive_seed(seed, purpose, index));
}

std::uint64_t SeededRng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double SeededRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t SeededRng::below(std::uint64_t bound) {
  // Lemire's nearly-divisionless rejection method.
  __uint128_t m = static_cast<__uint128_t>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<__uint128_t>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double SeededRng::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_normal_ = true;
  return radius * std::cos(angle);
}

bool SeededRng::bernoulli(double prob) { return uniform() < prob; }

std::vector<std::uint64_t> SeededRng::sample_without_replacement(std::uint64_t n,
                                                                 std::uint64_t k) {
  std::vector<std::uint64_t> out;
  if (k > n) k = n;
  out.reserve(k);
  // Sparse Fisher-Yates: only displaced slots are stored.
  std::unordered_map<std::uint64_t, std::uint64_t> swapped;
  swapped.reserve(static_cast<std::size_t>(k) * 2);
  auto slot = [&](std::uint64_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t j = i + below(n - i);
    const std::uint64_t vi = slot(i);
    const std::uint64_t vj = slot(j);
    swapped[j] = vi;
    swapped[i] = vj;
    out.push_back(vj);
  }
  return out;
}

}  // namespace spgcl
