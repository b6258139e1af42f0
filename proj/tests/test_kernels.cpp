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
#include <vector>

#include "spgcl/graph.hpp"
#include "spgcl/kernels.hpp"
#include "test_util.hpp"

using namespace spgcl;
using namespace spgcl::testing;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

void check_tables_agree(const kernels::KernelTable& x, const kernels::KernelTable& y) {
  SeededRng rng(17);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 33u, 100u}) {
    const Matrix a = random_matrix(1, n, rng);
    const Matrix b = random_matrix(1, n, rng);
    CHECK(rel_err(x.dot(a.data(), b.data(), n), y.dot(a.data(), b.data(), n)) < 1e-13);

    Matrix ya = b, yb = b;
    x.axpy(0.7, a.data(), ya.data(), n);
    y.axpy(0.7, a.data(), yb.data(), n);
    CHECK(max_abs_diff(ya, yb) < 1e-14);  // FMA contraction may differ by one rounding
  }
  for (auto [m, k, n] : {std::tuple{1, 1, 1}, {5, 3, 7}, {9, 13, 6}, {16, 8, 17}, {31, 5, 2}, {37, 50, 70}}) {
    Matrix a = random_matrix(m, k, rng);
    a(0, 0) = 0.0;  // zero skipping path
    const Matrix b_nn = random_matrix(k, n, rng);
    const Matrix b_nt = random_matrix(n, k, rng);
    const Matrix b_tn = random_matrix(m, n, rng);
    for (bool acc : {false, true}) {
      Matrix c1 = random_matrix(m, n, rng), c2 = c1;
      x.gemm_nn(a.data(), b_nn.data(), c1.data(), m, k, n, acc);
      y.gemm_nn(a.data(), b_nn.data(), c2.data(), m, k, n, acc);
      CHECK(max_abs_diff(c1, c2) < 1e-12);

      Matrix d1 = random_matrix(m, n, rng), d2 = d1;
      x.gemm_nt(a.data(), b_nt.data(), d1.data(), m, k, n, acc);
      y.gemm_nt(a.data(), b_nt.data(), d2.data(), m, k, n, acc);
      CHECK(max_abs_diff(d1, d2) < 1e-12);

      Matrix e1 = random_matrix(k, n, rng), e2 = e1;
      x.gemm_tn(a.data(), b_tn.data(), e1.data(), m, k, n, acc);
      y.gemm_tn(a.data(), b_tn.data(), e2.data(), m, k, n, acc);
      CHECK(max_abs_diff(e1, e2) < 1e-12);
    }
  }
  const SparseMatrix s = normalize_adjacency(random_graph(40, 0.2, rng));
  for (std::size_t n : {1u, 3u, 4u, 9u}) {
    const Matrix xin = random_matrix(40, n, rng);
    Matrix y1(40, n), y2(40, n);
    x.spmm(s.row_ptr.data(), s.col_idx.data(), s.values.data(), 40, xin.data(), y1.data(), n);
    y.spmm(s.row_ptr.data(), s.col_idx.data(), s.values.data(), 40, xin.data(), y2.data(), n);
    CHECK(max_abs_diff(y1, y2) < 1e-13);
  }
  for (std::size_t n : {0u, 1u, 5u, 64u}) {
    Matrix in = random_matrix(1, n, rng, 3.0);
    if (n > 0) in(0, 0) = -800.0;  // underflows (to zero or a denormal)
    Matrix o1(1, n), o2(1, n);
    const double s1 = x.exp_shift(in.data(), 2.0, 1.5, o1.data(), n);
    const double s2 = y.exp_shift(in.data(), 2.0, 1.5, o2.data(), n);
    CHECK(rel_err(s1, s2) < 1e-14);
    for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(o1(0, i), o2(0, i)) < 1e-14);
  }
}

/// Each output row of a product is the same no matter which row block it is
/// computed in.
void check_row_blocks(const kernels::KernelTable& k) {
  SeededRng rng(23);
  const std::size_t m = 13, kk = 29, n = 37;
  Matrix a = random_matrix(m, kk, rng);
  a(3, 4) = 0.0;
  const Matrix b_nn = random_matrix(kk, n, rng), b_nt = random_matrix(n, kk, rng);
  Matrix full_nn(m, n), full_nt(m, n);
  k.gemm_nn(a.data(), b_nn.data(), full_nn.data(), m, kk, n, false);
  k.gemm_nt(a.data(), b_nt.data(), full_nt.data(), m, kk, n, false);
  for (std::size_t begin = 0; begin < m; begin += 3) {
    const std::size_t rows = std::min<std::size_t>(3, m - begin);
    Matrix part_nn(rows, n), part_nt(rows, n);
    k.gemm_nn(a.data() + begin * kk, b_nn.data(), part_nn.data(), rows, kk, n, false);
    k.gemm_nt(a.data() + begin * kk, b_nt.data(), part_nt.data(), rows, kk, n, false);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(part_nn(r, j) == full_nn(begin + r, j));
        CHECK(part_nt(r, j) == full_nt(begin + r, j));
      }
  }
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar gemm matches a long-double triple loop") {
    SeededRng rng(3);
    const Matrix a = random_matrix(11, 7, rng);
    const Matrix b = random_matrix(7, 5, rng);
    const auto& k = kernels::scalar_table();
    Matrix c(11, 5);
    k.gemm_nn(a.data(), b.data(), c.data(), 11, 7, 5, false);
    CHECK(max_abs_diff(c, naive_matmul(a, b)) < 1e-13);
  }

  TEST_CASE("matmul variants agree with transposes") {
    SeededRng rng(5);
    const Matrix a = random_matrix(6, 4, rng);
    const Matrix b = random_matrix(5, 4, rng);
    CHECK(max_abs_diff(matmul_nt(a, b), naive_matmul(a, b.transposed())) < 1e-13);
    const Matrix c = random_matrix(6, 3, rng);
    CHECK(max_abs_diff(matmul_tn(a, c), naive_matmul(a.transposed(), c)) < 1e-13);
  }

  TEST_CASE("avx2 table is equivalent to the scalar reference") {
    const kernels::KernelTable* avx = kernels::avx2_table();
    if (avx == nullptr) {
      MESSAGE("AVX2 unavailable; equivalence not exercised");
      return;
    }
    check_tables_agree(kernels::scalar_table(), *avx);
  }

  TEST_CASE("row blocks of a product equal the full product bit for bit") {
    check_row_blocks(kernels::scalar_table());
    if (const auto* avx = kernels::avx2_table()) check_row_blocks(*avx);
  }

  TEST_CASE("each table is bitwise reproducible") {
    SeededRng rng(9);
    const Matrix a = random_matrix(1, 1001, rng);
    const Matrix b = random_matrix(1, 1001, rng);
    const auto& k = kernels::active();
    CHECK(k.dot(a.data(), b.data(), 1001) == k.dot(a.data(), b.data(), 1001));
  }
}
