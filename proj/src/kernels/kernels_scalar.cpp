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


#include <cmath>
#include <cstring>

#include "kernels_impl.hpp"

namespace spgcl::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  // Four interleaved partial sums, same lane assignment as the AVX2 variant
  // up to rounding of the FMA.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((s0 + s1) + (s2 + s3)) + tail;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * m * n);
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      axpy(av, b + p * n, crow, n);
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = dot(arow, b + j * k, k);
      crow[j] = accumulate ? crow[j] + v : v;
    }
  }
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * k * n);
  for (std::size_t r = 0; r < m; ++r) {
    const double* arow = a + r * k;
    const double* brow = b + r * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      axpy(av, brow, c + p * n, n);
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

double exp_shift(const double* x, double scale, double shift, double* out, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(x[i] * scale - shift);
    sum += out[i];
  }
  return sum;
}

}  // namespace spgcl::kernels::scalar

namespace spgcl::kernels {

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",       scalar::dot,     scalar::axpy, scalar::gemm_nn,
      scalar::gemm_nt, scalar::gemm_tn, scalar::spmm, scalar::exp_shift,
  };
  return table;
}

}  // namespace spgcl::kernels
