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

#pragma once

#include <cstddef>
#include <cstdint>

namespace binet::kernels {

/// Sum over i of popcount(a[i] ^ b[i]).
std::uint64_t xor_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t words);

/// Sum over i of popcount((a[i] ^ b[i]) & mask[i]).
std::uint64_t xor_popcount_masked(const std::uint64_t* a, const std::uint64_t* b,
                                  const std::uint64_t* mask, std::size_t words);

namespace detail {
std::uint64_t xor_popcount_scalar(const std::uint64_t* a, const std::uint64_t* b,
                                  std::size_t words);
std::uint64_t xor_popcount_masked_scalar(const std::uint64_t* a, const std::uint64_t* b,
                                         const std::uint64_t* mask, std::size_t words);
std::uint64_t xor_popcount_avx2(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t words);
std::uint64_t xor_popcount_masked_avx2(const std::uint64_t* a, const std::uint64_t* b,
                                       const std::uint64_t* mask, std::size_t words);
}  // namespace detail

}  // namespace binet::kernels
