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

#include "spgcl/error.hpp"
#include "spgcl/svd.hpp"
#include "test_util.hpp"

using namespace spgcl;
using namespace spgcl::testing;

namespace {

Matrix gram_minus_identity(const Matrix& u) {
  Matrix g = matmul_tn(u, u);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
  return g;
}

SparseMatrix random_symmetric_sparse(std::size_t n, double density, SeededRng& rng) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      if (rng.uniform() < density) m(i, j) = m(j, i) = rng.normal();
  return SparseMatrix::from_dense(m);
}

}  // namespace

TEST_SUITE("svd") {
  TEST_CASE("randomized_svd on diag(3,2,1), r = 2") {
    const Matrix d{{3, 0, 0}, {0, 2, 0}, {0, 0, 1}};
    SvdConfig cfg;
    cfg.rank = 2;
    const TruncatedSVD s = randomized_svd(SparseMatrix::from_dense(d), cfg);
    REQUIRE(s.rank() == 2);
    CHECK(s.sigma[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(s.sigma[1] == doctest::Approx(2.0).epsilon(1e-12));
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(std::abs(std::abs(s.u(k, k)) - 1.0) < 1e-10);
      CHECK(std::abs(std::abs(s.v(k, k)) - 1.0) < 1e-10);
    }
  }

  TEST_CASE("randomized_svd of the zero matrix") {
    SvdConfig cfg;
    cfg.rank = 1;
    const TruncatedSVD s = randomized_svd(SparseMatrix::from_dense(Matrix(4, 4)), cfg);
    CHECK(s.sigma == std::vector<double>{0.0});
  }

  TEST_CASE("randomized_svd matches the exact oracle on a 50x50 sparse symmetric matrix") {
    SeededRng rng(21);
    const SparseMatrix m = random_symmetric_sparse(50, 0.1, rng);
    SvdConfig cfg;
    cfg.rank = 8;
    const TruncatedSVD approx = randomized_svd(m, cfg);
    const TruncatedSVD exact = exact_svd(m.to_dense());
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(std::abs(approx.sigma[i] - exact.sigma[i]) <= 1e-4 * exact.sigma[i]);
    }
    CHECK(max_abs(gram_minus_identity(approx.u)) < 1e-6);
    CHECK(max_abs(gram_minus_identity(approx.v)) < 1e-6);
    for (std::size_t i = 1; i < 8; ++i) CHECK(approx.sigma[i - 1] >= approx.sigma[i]);
  }

  TEST_CASE("randomized_svd is deterministic per seed and validates rank") {
    SeededRng rng(22);
    const SparseMatrix m = random_symmetric_sparse(30, 0.2, rng);
    SvdConfig cfg;
    cfg.rank = 5;
    cfg.seed = 9;
    const TruncatedSVD a = randomized_svd(m, cfg);
    const TruncatedSVD b = randomized_svd(m, cfg);
    CHECK(a.u == b.u);
    CHECK(a.sigma == b.sigma);
    cfg.rank = 0;
    CHECK_THROWS_AS(randomized_svd(m, cfg), Error);
    cfg.rank = 31;
    CHECK_THROWS_AS(randomized_svd(m, cfg), Error);
  }

  TEST_CASE("exact_svd: rotation and swap have unit singular values") {
    const double c = std::cos(0.3), s = std::sin(0.3);
    for (const Matrix& m : {Matrix{{c, -s}, {s, c}}, Matrix{{0, 1}, {1, 0}}}) {
      const TruncatedSVD r = exact_svd(m);
      CHECK(std::abs(r.sigma[0] - 1.0) < 1e-14);
      CHECK(std::abs(r.sigma[1] - 1.0) < 1e-14);
    }
  }

  TEST_CASE("exact_svd: orthogonality and reconstruction on random matrices") {
    SeededRng rng(23);
    for (auto [rows, cols] : {std::pair{20, 20}, {25, 12}, {9, 17}}) {
      const Matrix m = random_matrix(rows, cols, rng);
      const TruncatedSVD r = exact_svd(m);
      CHECK(max_abs(gram_minus_identity(r.u)) < 1e-8);
      CHECK(max_abs(gram_minus_identity(r.v)) < 1e-8);
      Matrix diff = reconstruct(r);
      for (std::size_t i = 0; i < diff.size(); ++i) diff.values()[i] -= m.values()[i];
      CHECK(diff.frobenius_norm() <= 1e-8 * m.frobenius_norm());
    }
    CHECK_THROWS_AS(exact_svd(Matrix(501, 2)), Error);
  }

  TEST_CASE("exact_svd handles rank-deficient input") {
    const Matrix m{{1, 2, 3}, {2, 4, 6}, {0, 0, 0}};
    const TruncatedSVD r = exact_svd(m);
    CHECK(r.sigma[1] < 1e-12);
    CHECK(max_abs(gram_minus_identity(r.u)) < 1e-8);
    CHECK(max_abs_diff(reconstruct(r), m) < 1e-12);
  }

  TEST_CASE("reconstruct with overrides") {
    const Matrix d{{3, 0, 0}, {0, 2, 0}, {0, 0, 1}};
    const TruncatedSVD r = exact_svd(d);
    const std::vector<double> same = r.sigma;
    CHECK(reconstruct(r, same) == reconstruct(r));
    const std::vector<double> zeros(3, 0.0);
    CHECK(max_abs(reconstruct(r, zeros)) == 0.0);
    const std::vector<double> diag{3, 2, 1};
    CHECK(max_abs_diff(reconstruct(r, diag), d) < 1e-8);
    const std::vector<double> short_override{1.0};
    CHECK_THROWS_AS(reconstruct(r, short_override), Error);
  }

  TEST_CASE("sign convention: largest |u| entry positive, reconstruction unchanged") {
    SeededRng rng(24);
    TruncatedSVD r = exact_svd(random_matrix(12, 12, rng));
    for (std::size_t k = 0; k < r.rank(); ++k) {
      for (std::size_t i = 0; i < r.u.rows(); ++i) {
        r.u(i, k) = -r.u(i, k);
        r.v(i, k) = -r.v(i, k);
      }
    }
    const Matrix before = reconstruct(r);
    apply_sign_convention(r);
    CHECK(max_abs_diff(reconstruct(r), before) < 1e-13);
    for (std::size_t k = 0; k < r.rank(); ++k) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < r.u.rows(); ++i)
        if (std::abs(r.u(i, k)) > std::abs(r.u(best, k))) best = i;
      CHECK(r.u(best, k) > 0.0);
    }
  }

  TEST_CASE("full-rank randomized reconstruction recovers the matrix") {
    SeededRng rng(25);
    for (std::size_t n : {5u, 20u, 50u}) {
      const SparseMatrix m = random_symmetric_sparse(n, 0.3, rng);
      SvdConfig cfg;
      cfg.rank = n;
      const Matrix dense = m.to_dense();
      Matrix diff = reconstruct(randomized_svd(m, cfg));
      for (std::size_t i = 0; i < diff.size(); ++i) diff.values()[i] -= dense.values()[i];
      CHECK(diff.frobenius_norm() <= 1e-6 * dense.frobenius_norm());
    }
  }

  TEST_CASE("reconstruct_rows equals the matching rows of reconstruct bitwise") {
    SeededRng rng(26);
    const TruncatedSVD r = truncate(exact_svd(random_matrix(15, 15, rng)), 6);
    const Matrix full = reconstruct(r);
    const Matrix block = reconstruct_rows(r, r.sigma, 4, 11);
    for (std::size_t i = 0; i < block.rows(); ++i)
      for (std::size_t j = 0; j < block.cols(); ++j) CHECK(block(i, j) == full(i + 4, j));
  }
}
