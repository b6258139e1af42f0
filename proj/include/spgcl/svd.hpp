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
#include <vector>

#include "spgcl/graph.hpp"
#include "spgcl/matrix.hpp"

namespace spgcl {

inline constexpr std::size_t kExactSvdCap = 500;

/// Rank-r factors with singular vectors stored as matrix columns:
/// u is rows x r, v is cols x r, sigma descending and nonnegative.
struct TruncatedSVD {
  Matrix u;
  std::vector<double> sigma;
  Matrix v;

  [[nodiscard]] std::size_t rank() const noexcept { return sigma.size(); }
};

struct SvdConfig {
  std::size_t rank = 50;
  std::size_t oversampling = 10;
  std::size_t power_iters = 7;
  std::uint64_t seed = 0;
};

/// Randomized range finder with power iterations, followed by an exact SVD of
/// the projected (rank + oversampling) x n problem.
///
/// Oversampling is clamped to min(rows, cols) - rank so small matrices can be
/// factored at full rank. Throws RankTooLarge when rank is 0 or exceeds
/// min(rows, cols).
TruncatedSVD randomized_svd(const SparseMatrix& m, const SvdConfig& cfg);

/// One-sided Jacobi SVD of a dense matrix, all min(rows, cols) triplets.
/// Test oracle; throws CapExceeded when either dimension exceeds `cap`.
TruncatedSVD exact_svd(const Matrix& m, std::size_t cap = kExactSvdCap);

/// Keeps the first `rank` triplets.
TruncatedSVD truncate(const TruncatedSVD& svd, std::size_t rank);

/// Flips each (u_i, v_i) pair so the largest-magnitude entry of u_i is
/// positive (first index wins ties).
void apply_sign_convention(TruncatedSVD& svd);

/// U * diag(sigma') * V^T with sigma' = override or the stored sigma.
/// Throws LengthMismatch when the override length differs from the rank.
Matrix reconstruct(const TruncatedSVD& svd,
                   std::optional<std::span<const double>> sigma_override = std::nullopt);

/// Rows [row_begin, row_end) of reconstruct(svd, sigma); bitwise equal to the
/// corresponding rows of the full reconstruction.
Matrix reconstruct_rows(const TruncatedSVD& svd, std::span<const double> sigma,
                        std::size_t row_begin, std::size_t row_end);

/// U with column k scaled by sigma[k]; shared by the full and block forms.
Matrix scale_columns(const Matrix& u, std::span<const double> sigma);

}  // namespace spgcl
