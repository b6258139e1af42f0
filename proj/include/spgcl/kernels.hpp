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
#include <string_view>

namespace spgcl::kernels {

// Row-major double kernels behind every dense and sparse product in the
// library. Each ISA provides the same table; `active()` is chosen once at
// startup from CPUID (overridable with SPGCL_KERNELS=scalar|avx2).
//
// Within one table the reduction order is fixed, so results are bitwise
// reproducible run to run. Tables differ from each other only by rounding.
struct KernelTable {
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // C[m x n] (+)= A[m x k] * B[k x n]. Zero entries of A are skipped.
  void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n, bool accumulate);
  // C[m x n] (+)= A[m x k] * B[n x k]^T
  void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n, bool accumulate);
  // C[k x n] (+)= A[m x k]^T * B[m x n]. Zero entries of A are skipped.
  void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n, bool accumulate);

  // Y[rows x n] = S * X for CSR S; nonzeros visited in stored order.
  void (*spmm)(const std::size_t* row_ptr, const std::uint32_t* col, const double* val,
               std::size_t rows, const double* x, double* y, std::size_t n);

  // out[i] = exp(x[i] * scale - shift); returns the sum of out. out may alias x.
  double (*exp_shift)(const double* x, double scale, double shift, double* out, std::size_t n);
};

const KernelTable& scalar_table();
/// nullptr when the binary was built without AVX2 or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table();

/// The table used by the library.
const KernelTable& active();

/// Overrides the active table (tests and benchmarks). Not thread-safe.
void set_active(const KernelTable& table);

}  // namespace spgcl::kernels
