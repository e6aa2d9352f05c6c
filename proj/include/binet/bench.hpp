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

#include <cstdint>
#include <string>
#include <string_view>

namespace binet {

struct BenchGeometry {
  std::size_t in_channels = 256;
  std::size_t out_channels = 256;
  std::size_t kernel = 3;
  std::size_t height = 14;
  std::size_t width = 14;
  std::size_t stride = 1;
  std::size_t padding = 1;

  /// "CinxCoutxKxHxW", e.g. "256x256x3x14x14". Throws ConfigError.
  static BenchGeometry parse(std::string_view text);
  std::string str() const;
};

struct BenchResult {
  BenchGeometry geometry;
  int repetitions = 0;
  double ns_packed = 0.0;  ///< median over repetitions
  double ns_float = 0.0;   ///< median over repetitions
  double ratio = 0.0;      ///< ns_float / ns_packed
  int thread_count = 1;
};

/// Times one batch-1 convolution on random data: the packed path (sign,
/// im2row packing, XOR + popcount, shift) against the naive float loop nest.
/// Runs on the calling thread only.
BenchResult benchmark_conv(const BenchGeometry& g, int repetitions, std::uint64_t seed = 0);

/// {"geometry", "ns_packed", "ns_float", "ratio", "thread_count", ...}
std::string bench_json(const BenchResult& r);

}  // namespace binet
