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

#include "binet/kernels/bitops.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace binet::kernels::detail {

#if defined(__AVX2__)
namespace {

// Nibble-lookup popcount (Mula): per-byte counts via pshufb, folded into
// four 64-bit lanes with psadbw.
inline __m256i popcount_bytes(__m256i v) noexcept {
  const __m256i lookup = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,  //
                                          0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low_mask);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  return _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo), _mm256_shuffle_epi8(lookup, hi));
}

inline std::uint64_t horizontal_sum(__m256i acc) noexcept {
  return static_cast<std::uint64_t>(_mm256_extract_epi64(acc, 0)) +
         static_cast<std::uint64_t>(_mm256_extract_epi64(acc, 1)) +
         static_cast<std::uint64_t>(_mm256_extract_epi64(acc, 2)) +
         static_cast<std::uint64_t>(_mm256_extract_epi64(acc, 3));
}

// Below this many words the vector setup costs more than hardware popcnt.
constexpr std::size_t kVectorThreshold = 16;

}  // namespace

std::uint64_t xor_popcount_avx2(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t words) {
  std::size_t i = 0;
  std::uint64_t total = 0;
  if (words >= kVectorThreshold) {
    __m256i acc = _mm256_setzero_si256();
    const __m256i zero = _mm256_setzero_si256();
    for (; i + 4 <= words; i += 4) {
      const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
      const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
      const __m256i counts = popcount_bytes(_mm256_xor_si256(va, vb));
      acc = _mm256_add_epi64(acc, _mm256_sad_epu8(counts, zero));
    }
    total = horizontal_sum(acc);
  }
  for (; i < words; ++i) total += static_cast<std::uint64_t>(_mm_popcnt_u64(a[i] ^ b[i]));
  return total;
}

std::uint64_t xor_popcount_masked_avx2(const std::uint64_t* a, const std::uint64_t* b,
                                       const std::uint64_t* mask, std::size_t words) {
  std::size_t i = 0;
  std::uint64_t total = 0;
  if (words >= kVectorThreshold) {
    __m256i acc = _mm256_setzero_si256();
    const __m256i zero = _mm256_setzero_si256();
    for (; i + 4 <= words; i += 4) {
      const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
      const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
      const __m256i vm = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(mask + i));
      const __m256i counts = popcount_bytes(_mm256_and_si256(_mm256_xor_si256(va, vb), vm));
      acc = _mm256_add_epi64(acc, _mm256_sad_epu8(counts, zero));
    }
    total = horizontal_sum(acc);
  }
  for (; i < words; ++i) {
    total += static_cast<std::uint64_t>(_mm_popcnt_u64((a[i] ^ b[i]) & mask[i]));
  }
  return total;
}

#else

std::uint64_t xor_popcount_avx2(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t words) {
  return xor_popcount_scalar(a, b, words);
}

std::uint64_t xor_popcount_masked_avx2(const std::uint64_t* a, const std::uint64_t* b,
                                       const std::uint64_t* mask, std::size_t words) {
  return xor_popcount_masked_scalar(a, b, mask, words);
}

#endif

}  // namespace binet::kernels::detail
