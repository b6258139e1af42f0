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


#include <immintrin.h>

#include <cmath>
#include <algorithm>
#include <cstring>
#include <vector>

#include "kernels_impl.hpp"

// Every output element of the GEMMs below is produced by one fixed sequence
// of fused multiply-adds, independent of where the element falls in a
// register block or tail. A row (or column) block of a product is therefore
// bitwise equal to the same rows of the full product.

namespace spgcl::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256i lane_mask(std::size_t lanes) {
  return _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(lanes)),
                            _mm256_setr_epi64x(0, 1, 2, 3));
}

/// c[0..cols) of `Rows` consecutive output rows += sum_p a(r, p) * b(p, :),
/// p ascending, zero a skipped; V vectors span the columns, the last one
/// masked. `a_at(r, p)` abstracts the A layout.
template <std::size_t Rows, std::size_t V, typename AAt>
inline void fma_block(AAt a_at, const double* b, std::size_t ldb, std::size_t k, double* c,
                      std::size_t ldc, __m256i last) {
  __m256d acc[Rows][V];
  for (std::size_t r = 0; r < Rows; ++r) {
    for (std::size_t v = 0; v + 1 < V; ++v) acc[r][v] = _mm256_loadu_pd(c + r * ldc + 4 * v);
    acc[r][V - 1] = _mm256_maskload_pd(c + r * ldc + 4 * (V - 1), last);
  }
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = b + p * ldb;
    __m256d bv[V];
    for (std::size_t v = 0; v + 1 < V; ++v) bv[v] = _mm256_loadu_pd(brow + 4 * v);
    bv[V - 1] = _mm256_maskload_pd(brow + 4 * (V - 1), last);
    for (std::size_t r = 0; r < Rows; ++r) {
      const double av = a_at(r, p);
      if (av == 0.0) continue;
      const __m256d va = _mm256_set1_pd(av);
      for (std::size_t v = 0; v < V; ++v) acc[r][v] = _mm256_fmadd_pd(va, bv[v], acc[r][v]);
    }
  }
  for (std::size_t r = 0; r < Rows; ++r) {
    for (std::size_t v = 0; v + 1 < V; ++v) _mm256_storeu_pd(c + r * ldc + 4 * v, acc[r][v]);
    _mm256_maskstore_pd(c + r * ldc + 4 * (V - 1), last, acc[r][V - 1]);
  }
}

/// All rows for one column panel of V vectors: Rows at a time, then singles.
template <std::size_t Rows, std::size_t V, typename AAtRow>
inline void fma_panel(AAtRow a_row, const double* b, std::size_t ldb, std::size_t k, double* c,
                      std::size_t ldc, std::size_t m, __m256i last) {
  std::size_t i = 0;
  for (; i + Rows <= m; i += Rows) {
    fma_block<Rows, V>([&](std::size_t r, std::size_t p) { return a_row(i + r, p); }, b, ldb, k,
                       c + i * ldc, ldc, last);
  }
  for (; i < m; ++i) {
    fma_block<1, V>([&](std::size_t, std::size_t p) { return a_row(i, p); }, b, ldb, k,
                    c + i * ldc, ldc, last);
  }
}

/// Broadcast-FMA driver shared by gemm_nn, gemm_tn and short gemm_nt:
/// C[m x n] += sum_p A(i, p) B(p, :). Column panels are outermost so a B
/// panel stays in cache across all rows. Every element sees the same chain
/// of FMAs whichever panel, row group or mask lane it lands in.
template <typename AAtRow>
void broadcast_gemm(AAtRow a_row, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n) {
  const __m256i full = lane_mask(4);
  std::size_t col = 0;
  for (; col + 16 <= n; col += 16) fma_panel<2, 4>(a_row, b + col, n, k, c + col, n, m, full);
  const std::size_t rest = n - col;
  if (rest == 0) return;
  const __m256i last = lane_mask(rest - (rest - 1) / 4 * 4);
  switch ((rest + 3) / 4) {
    case 1: fma_panel<4, 1>(a_row, b + col, n, k, c + col, n, m, last); break;
    case 2: fma_panel<4, 2>(a_row, b + col, n, k, c + col, n, m, last); break;
    case 3: fma_panel<2, 3>(a_row, b + col, n, k, c + col, n, m, last); break;
    default: fma_panel<2, 4>(a_row, b + col, n, k, c + col, n, m, last); break;
  }
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double tail = 0.0;
  for (; i < n; ++i) tail = std::fma(a[i], b[i], tail);
  return hsum(_mm256_add_pd(acc0, acc1)) + tail;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * m * n);
  broadcast_gemm([=](std::size_t i, std::size_t p) { return a[i * k + p]; }, b, c, m, k, n);
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  // C[k x n] = A^T B: output row p, reduction over r. Columns of A are
  // packed eight at a time so the strided reads touch each cache line once.
  if (!accumulate) std::memset(c, 0, sizeof(double) * k * n);
  constexpr std::size_t kPanel = 8;
  std::vector<double> panel(kPanel * m);
  for (std::size_t p0 = 0; p0 < k; p0 += kPanel) {
    const std::size_t width = std::min(kPanel, k - p0);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t q = 0; q < width; ++q) panel[q * m + r] = a[r * k + p0 + q];
    const double* pp = panel.data();
    broadcast_gemm([=](std::size_t q, std::size_t r) { return pp[q * m + r]; }, b, c + p0 * n,
                   width, m, n);
  }
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  if (k < 8) {
    // Too short for the vector dot: transpose B and broadcast instead. The
    // choice depends on k alone, so every element of every call with this k
    // follows the same summation order.
    std::vector<double> bt(k * n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
    if (!accumulate) std::memset(c, 0, sizeof(double) * m * n);
    broadcast_gemm([=](std::size_t i, std::size_t p) { return a[i * k + p]; }, bt.data(), c, m, k, n);
    return;
  }
  // Four dot products per pass share the loads of the A row; each one uses
  // exactly the accumulator layout of dot().
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const double* b0 = b + j * k;
      const double* b1 = b0 + k;
      const double* b2 = b1 + k;
      const double* b3 = b2 + k;
      __m256d x0 = _mm256_setzero_pd(), y0 = _mm256_setzero_pd();
      __m256d x1 = _mm256_setzero_pd(), y1 = _mm256_setzero_pd();
      __m256d x2 = _mm256_setzero_pd(), y2 = _mm256_setzero_pd();
      __m256d x3 = _mm256_setzero_pd(), y3 = _mm256_setzero_pd();
      std::size_t p = 0;
      for (; p + 8 <= k; p += 8) {
        const __m256d a0 = _mm256_loadu_pd(arow + p);
        const __m256d a1 = _mm256_loadu_pd(arow + p + 4);
        x0 = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b0 + p), x0);
        y0 = _mm256_fmadd_pd(a1, _mm256_loadu_pd(b0 + p + 4), y0);
        x1 = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b1 + p), x1);
        y1 = _mm256_fmadd_pd(a1, _mm256_loadu_pd(b1 + p + 4), y1);
        x2 = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b2 + p), x2);
        y2 = _mm256_fmadd_pd(a1, _mm256_loadu_pd(b2 + p + 4), y2);
        x3 = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b3 + p), x3);
        y3 = _mm256_fmadd_pd(a1, _mm256_loadu_pd(b3 + p + 4), y3);
      }
      if (p + 4 <= k) {
        const __m256d a0 = _mm256_loadu_pd(arow + p);
        x0 = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b0 + p), x0);
        x1 = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b1 + p), x1);
        x2 = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b2 + p), x2);
        x3 = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b3 + p), x3);
        p += 4;
      }
      double t0 = 0.0, t1 = 0.0, t2 = 0.0, t3 = 0.0;
      for (; p < k; ++p) {
        t0 = std::fma(arow[p], b0[p], t0);
        t1 = std::fma(arow[p], b1[p], t1);
        t2 = std::fma(arow[p], b2[p], t2);
        t3 = std::fma(arow[p], b3[p], t3);
      }
      const double v[4] = {hsum(_mm256_add_pd(x0, y0)) + t0, hsum(_mm256_add_pd(x1, y1)) + t1,
                           hsum(_mm256_add_pd(x2, y2)) + t2, hsum(_mm256_add_pd(x3, y3)) + t3};
      for (std::size_t q = 0; q < 4; ++q) crow[j + q] = accumulate ? crow[j + q] + v[q] : v[q];
    }
    for (; j < n; ++j) {
      const double v = dot(arow, b + j * k, k);
      crow[j] = accumulate ? crow[j] + v : v;
    }
  }
}

void spmm(const std::size_t* row_ptr, const std::uint32_t* col, const double* val,
          std::size_t rows, const double* x, double* y, std::size_t n) {
  std::memset(y, 0, sizeof(double) * rows * n);
  for (std::size_t i = 0; i < rows; ++i) {
    double* yrow = y + i * n;
    for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) {
      axpy(val[e], x + static_cast<std::size_t>(col[e]) * n, yrow, n);
    }
  }
}

namespace {

// exp(t) for t <= 709.7: t = m ln2 + r with |r| <= ln2/2, exp(r) from the
// classic (Cephes) rational approximation, then scaled by 2^m. Agrees with
// std::exp to a few ulp; arguments below -708 flush to zero.
inline __m256d exp4(__m256d t) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125E-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212E-6);
  const __m256d lo_limit = _mm256_set1_pd(-708.0);
  const __m256d hi_limit = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(t, lo_limit, _CMP_LT_OQ);
  t = _mm256_min_pd(_mm256_max_pd(t, lo_limit), hi_limit);

  const __m256d m = _mm256_round_pd(_mm256_mul_pd(t, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(m, ln2_hi, t);
  r = _mm256_fnmadd_pd(m, ln2_lo, r);

  const __m256d r2 = _mm256_mul_pd(r, r);
  __m256d px = _mm256_set1_pd(1.26177193074810590878E-4);
  px = _mm256_fmadd_pd(px, r2, _mm256_set1_pd(3.02994407707441961300E-2));
  px = _mm256_fmadd_pd(px, r2, _mm256_set1_pd(9.99999999999999999910E-1));
  px = _mm256_mul_pd(px, r);
  __m256d qx = _mm256_set1_pd(3.00198505138664455042E-6);
  qx = _mm256_fmadd_pd(qx, r2, _mm256_set1_pd(2.52448340349684104192E-3));
  qx = _mm256_fmadd_pd(qx, r2, _mm256_set1_pd(2.27265548208155028766E-1));
  qx = _mm256_fmadd_pd(qx, r2, _mm256_set1_pd(2.00000000000000000009E0));
  // e^r = 1 + 2 px / (qx - px)
  const __m256d er = _mm256_fmadd_pd(_mm256_set1_pd(2.0),
                                     _mm256_div_pd(px, _mm256_sub_pd(qx, px)), _mm256_set1_pd(1.0));

  // 2^m via the exponent field; m is within [-1022, 1023] after clamping.
  const __m128i mi = _mm256_cvtpd_epi32(m);
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(mi), _mm256_set1_epi64x(1023)), 52);
  const __m256d result = _mm256_mul_pd(er, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, result);
}

}  // namespace

double exp_shift(const double* x, double scale, double shift, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(scale);
  const __m256d vh = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d e = exp4(_mm256_sub_pd(_mm256_mul_pd(_mm256_loadu_pd(x + i), vs), vh));
    _mm256_storeu_pd(out + i, e);
    acc = _mm256_add_pd(acc, e);
  }
  double tail = 0.0;
  if (i < n) {
    double in[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t q = i; q < n; ++q) in[q - i] = x[q] * scale - shift;
    double res[4];
    _mm256_storeu_pd(res, exp4(_mm256_loadu_pd(in)));
    for (std::size_t q = i; q < n; ++q) {
      out[q] = res[q - i];
      tail += res[q - i];
    }
  }
  return hsum(acc) + tail;
}

}  // namespace spgcl::kernels::avx2

namespace spgcl::kernels::detail {

const KernelTable& avx2_table_impl() {
  static const KernelTable table{
      "avx2",        avx2::dot,     avx2::axpy, avx2::gemm_nn,
      avx2::gemm_nt, avx2::gemm_tn, avx2::spmm, avx2::exp_shift,
  };
  return table;
}

}  // namespace spgcl::kernels::detail
