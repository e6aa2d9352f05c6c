// Copyright 2026 The binet Authors
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

#include "binet/kernels/dispatch.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "binet/error.hpp"
#include "binet/kernels/bitops.hpp"
#include "binet/kernels/gemm.hpp"

namespace binet::kernels {
namespace {

bool host_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma") &&
         __builtin_cpu_supports("popcnt");
#else
  return false;
#endif
}

Isa initial_isa() noexcept {
  if (const char* env = std::getenv("BINET_ISA")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && host_has_avx2()) return Isa::avx2;
  }
  return best_isa();
}

std::atomic<Isa>& active_slot() noexcept {
  static std::atomic<Isa> slot{initial_isa()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return host_has_avx2();
  }
  return false;
}

Isa best_isa() noexcept { return host_has_avx2() ? Isa::avx2 : Isa::scalar; }

Isa active_isa() noexcept { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw ValueError("instruction set " + std::string(isa_name(isa)) +
                     " is not supported on this host");
  }
  active_slot().store(isa, std::memory_order_relaxed);
}

void sgemm(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
           const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
  if (active_isa() == Isa::avx2) {
    detail::sgemm_avx2(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
  } else {
    detail::sgemm_scalar(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
  }
}

std::uint64_t xor_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
  if (active_isa() == Isa::avx2) return detail::xor_popcount_avx2(a, b, words);
  return detail::xor_popcount_scalar(a, b, words);
}

std::uint64_t xor_popcount_masked(const std::uint64_t* a, const std::uint64_t* b,
                                  const std::uint64_t* mask, std::size_t words) {
  if (active_isa() == Isa::avx2) return detail::xor_popcount_masked_avx2(a, b, mask, words);
  return detail::xor_popcount_masked_scalar(a, b, mask, words);
}

}  // namespace binet::kernels
