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


#include "spgcl/svd.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spgcl/error.hpp"
#include "spgcl/rng.hpp"

namespace spgcl {

namespace {

using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajorMat> as_eigen(const Matrix& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

Matrix from_eigen(const Eigen::MatrixXd& e) {
  Matrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  Eigen::Map<RowMajorMat>(m.data(), e.rows(), e.cols()) = e;
  return m;
}

// Orthonormal basis for the column space via Householder QR. Always returns
// orthonormal columns, also when the input is rank deficient.
Matrix orthonormalize(const Matrix& y) {
  const Eigen::MatrixXd dense = as_eigen(y);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(dense);
  const Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(dense.rows(), dense.cols());
  return from_eigen(q);
}

}  // namespace

TruncatedSVD randomized_svd(const SparseMatrix& m, const SvdConfig& cfg) {
  const std::size_t min_dim = std::min(m.rows, m.cols);
  if (cfg.rank == 0 || cfg.rank > min_dim) {
    throw Error(ErrorCode::kRankTooLarge, "rank " + std::to_string(cfg.rank) +
                                              " invalid for " + std::to_string(m.rows) + "x" +
                                              std::to_string(m.cols) + " matrix");
  }
  const std::size_t width = cfg.rank + std::min(cfg.oversampling, min_dim - cfg.rank);

  SeededRng rng = SeededRng::derive(cfg.seed, StreamPurpose::kSvdSketch);
  Matrix sketch(m.cols, width);
  for (double& x : sketch.values()) x = rng.normal();

  Matrix q = orthonormalize(spmv(m, sketch));
  for (std::size_t it = 0; it < cfg.power_iters; ++it) {
    const Matrix z = orthonormalize(spmv_transposed(m, q));
    q = orthonormalize(spmv(m, z));
  }

  // B = Q^T A, handled as its transpose A^T Q (cols x width).
  const Matrix bt = spmv_transposed(m, q);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(as_eigen(bt).eval(),
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  // bt = W S Ut^T, so A ~ Q Ut S W^T.
  const Matrix w = from_eigen(svd.matrixU());
  const Matrix ut = from_eigen(svd.matrixV());
  const Matrix u_full = matmul(q, ut);

  TruncatedSVD out;
  out.u = Matrix(m.rows, cfg.rank);
  out.v = Matrix(m.cols, cfg.rank);
  out.sigma.resize(cfg.rank);
  for (std::size_t k = 0; k < cfg.rank; ++k) {
    out.sigma[k] = svd.singularValues()(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < m.rows; ++i) out.u(i, k) = u_full(i, k);
    for (std::size_t i = 0; i < m.cols; ++i) out.v(i, k) = w(i, k);
  }
  apply_sign_convention(out);
  return out;
}

TruncatedSVD exact_svd(const Matrix& input, std::size_t cap) {
  if (input.rows() > cap || input.cols() > cap) {
    throw Error(ErrorCode::kCapExceeded, "exact_svd limited to " + std::to_string(cap) +
                                             " rows/cols");
  }
  // Hestenes one-sided Jacobi on the tall orientation: orthogonalize columns
  // of W = A V by plane rotations; then sigma_j = |w_j|, u_j = w_j / sigma_j.
  const bool flip = input.rows() < input.cols();
  const Matrix a = flip ? input.transposed() : input;
  const std::size_t rows = a.rows();
  const std::size_t n = a.cols();

  std::vector<std::vector<double>> w(n, std::vector<double>(rows));
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < rows; ++i) w[j][i] = a(i, j);
    v[j][j] = 1.0;
  }

  auto dot = [](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
  };
  auto rotate = [](std::vector<double>& x, std::vector<double>& y, double c, double s) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xi = x[i];
      const double yi = y[i];
      x[i] = c * xi - s * yi;
      y[i] = s * xi + c * yi;
    }
  };

  constexpr double kTol = 1e-15;
  constexpr int kMaxSweeps = 80;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = dot(w[p], w[p]);
        const double beta = dot(w[q], w[q]);
        const double gamma = dot(w[p], w[q]);
        if (gamma == 0.0 || std::abs(gamma) <= kTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate(w[p], w[q], c, s);
        rotate(v[p], v[q], c, s);
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(dot(w[j], w[j]));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  const double scale = sigma.empty() ? 0.0 : sigma[order[0]];
  const double null_tol = std::max(scale, 1.0) * 1e-13 * static_cast<double>(rows);

  // Left vectors; null directions are completed by Gram-Schmidt against the
  // vectors already accepted so U stays orthonormal.
  std::vector<std::vector<double>> u_cols;
  u_cols.reserve(n);
  std::size_t next_basis = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    std::vector<double> col(rows, 0.0);
    if (sigma[j] > null_tol) {
      for (std::size_t i = 0; i < rows; ++i) col[i] = w[j][i] / sigma[j];
    } else {
      sigma[j] = 0.0;
      for (;;) {
        std::fill(col.begin(), col.end(), 0.0);
        col[next_basis++ % rows] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
          for (const auto& prev : u_cols) {
            const double proj = dot(prev, col);
            for (std::size_t i = 0; i < rows; ++i) col[i] -= proj * prev[i];
          }
        }
        const double norm = std::sqrt(dot(col, col));
        if (norm > 1e-6) {
          for (double& x : col) x /= norm;
          break;
        }
      }
    }
    u_cols.push_back(std::move(col));
  }

  TruncatedSVD out;
  out.sigma.resize(n);
  Matrix left(rows, n);
  Matrix right(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = sigma[j];
    for (std::size_t i = 0; i < rows; ++i) left(i, k) = u_cols[k][i];
    for (std::size_t i = 0; i < n; ++i) right(i, k) = v[j][i];
  }
  if (flip) {
    out.u = std::move(right);
    out.v = std::move(left);
  } else {
    out.u = std::move(left);
    out.v = std::move(right);
  }
  apply_sign_convention(out);
  return out;
}

TruncatedSVD truncate(const TruncatedSVD& svd, std::size_t rank) {
  if (rank > svd.rank()) {
    throw Error(ErrorCode::kRankTooLarge, "cannot truncate rank " + std::to_string(svd.rank()) +
                                              " to " + std::to_string(rank));
  }
  TruncatedSVD out;
  out.sigma.assign(svd.sigma.begin(), svd.sigma.begin() + static_cast<std::ptrdiff_t>(rank));
  out.u = Matrix(svd.u.rows(), rank);
  out.v = Matrix(svd.v.rows(), rank);
  for (std::size_t i = 0; i < svd.u.rows(); ++i) {
    for (std::size_t k = 0; k < rank; ++k) out.u(i, k) = svd.u(i, k);
  }
  for (std::size_t i = 0; i < svd.v.rows(); ++i) {
    for (std::size_t k = 0; k < rank; ++k) out.v(i, k) = svd.v(i, k);
  }
  return out;
}

void apply_sign_convention(TruncatedSVD& svd) {
  for (std::size_t k = 0; k < svd.rank(); ++k) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < svd.u.rows(); ++i) {
      const double a = std::abs(svd.u(i, k));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (svd.u.rows() > 0 && svd.u(best, k) < 0.0) {
      for (std::size_t i = 0; i < svd.u.rows(); ++i) svd.u(i, k) = -svd.u(i, k);
      for (std::size_t i = 0; i < svd.v.rows(); ++i) svd.v(i, k) = -svd.v(i, k);
    }
  }
}

Matrix scale_columns(const Matrix& u, std::span<const double> sigma) {
  Matrix out(u.rows(), u.cols());
  for (std::size_t i = 0; i < u.rows(); ++i) {
    for (std::size_t k = 0; k < u.cols(); ++k) out(i, k) = u(i, k) * sigma[k];
  }
  return out;
}

Matrix reconstruct(const TruncatedSVD& svd, std::optional<std::span<const double>> sigma_override) {
  std::span<const double> sigma = svd.sigma;
  if (sigma_override) {
    if (sigma_override->size() != svd.rank()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "sigma override has length " + std::to_string(sigma_override->size()) +
                      ", rank is " + std::to_string(svd.rank()));
    }
    sigma = *sigma_override;
  }
  return reconstruct_rows(svd, sigma, 0, svd.u.rows());
}

Matrix reconstruct_rows(const TruncatedSVD& svd, std::span<const double> sigma,
                        std::size_t row_begin, std::size_t row_end) {
  if (sigma.size() != svd.rank()) {
    throw Error(ErrorCode::kLengthMismatch, "sigma length does not match rank");
  }
  const std::size_t r = svd.rank();
  Matrix block(row_end - row_begin, r);
  for (std::size_t i = row_begin; i < row_end; ++i) {
    for (std::size_t k = 0; k < r; ++k) block(i - row_begin, k) = svd.u(i, k) * sigma[k];
  }
  return matmul_nt(block, svd.v);
}

}  // namespace spgcl
