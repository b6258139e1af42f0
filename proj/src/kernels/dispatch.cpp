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


#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace spgcl::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(SPGCL_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* select_default() {
  const KernelTable* simd = avx2_table();
  if (const char* env = std::getenv("SPGCL_KERNELS")) {
    const std::string_view want(env);
    if (want == "scalar") return &scalar_table();
    if (want == "avx2" && simd != nullptr) return simd;
  }
  return simd != nullptr ? simd : &scalar_table();
}

const KernelTable*& active_slot() {
  static const KernelTable* slot = select_default();
  return slot;
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(SPGCL_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &detail::avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *active_slot(); }

void set_active(const KernelTable& table) { active_slot() = &table; }

}  // namespace spgcl::kernels
