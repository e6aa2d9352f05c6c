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

#include "binet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <vector>

#include "json.hpp"

#include "binet/error.hpp"
#include "binet/kernels/dispatch.hpp"
#include "binet/packed.hpp"

namespace binet {

BenchGeometry BenchGeometry::parse(std::string_view text) {
  std::vector<std::size_t> dims;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('x', pos), text.size());
    const std::string part(text.substr(pos, end - pos));
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(part, &used);
      if (used != part.size() || v == 0) throw std::invalid_argument(part);
      dims.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad geometry '" + std::string(text) + "': expected CinxCoutxKxHxW");
    }
    pos = end + 1;
  }
  if (dims.size() != 5) throw ConfigError("bad geometry '" + std::string(text) + "': expected 5 fields");
  BenchGeometry g;
  g.in_channels = dims[0];
  g.out_channels = dims[1];
  g.kernel = dims[2];
  g.height = dims[3];
  g.width = dims[4];
  g.padding = g.kernel / 2;
  return g;
}

std::string BenchGeometry::str() const {
  return std::to_string(in_channels) + "x" + std::to_string(out_channels) + "x" +
         std::to_string(kernel) + "x" + std::to_string(height) + "x" + std::to_string(width);
}

namespace {

template <typename F>
double median_ns(int reps, F&& fn) {
  std::vector<double> ns;
  ns.reserve(static_cast<std::size_t>(reps));
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    ns.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
  }
  std::sort(ns.begin(), ns.end());
  const std::size_t n = ns.size();
  return n % 2 ? ns[n / 2] : 0.5 * (ns[n / 2 - 1] + ns[n / 2]);
}

}  // namespace

BenchResult benchmark_conv(const BenchGeometry& g, int repetitions, std::uint64_t seed) {
  if (repetitions <= 0) throw ConfigError("repetitions must be positive");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  Tensor x({1, g.in_channels, g.height, g.width});
  for (float& v : x.data()) v = coin(rng) ? 1.0f : -1.0f;
  Tensor w({g.out_channels, g.in_channels, g.kernel, g.kernel});
  for (float& v : w.data()) v = coin(rng) ? 1.0f : -1.0f;
  const auto geom = Conv2dGeometry::square(g.stride, g.padding);
  const packed::BinaryWeights bw = packed::make_binary_weights(w, 0, geom, false);

  BenchResult r;
  r.geometry = g;
  r.repetitions = repetitions;
  volatile float sink = 0.0f;
  r.ns_packed = median_ns(repetitions, [&] { sink = sink + packed::packed_conv2d(x, bw)[0]; });
  r.ns_float = median_ns(repetitions, [&] { sink = sink + packed::naive_conv2d(x, w, geom)[0]; });
  r.ratio = r.ns_packed > 0.0 ? r.ns_float / r.ns_packed : 0.0;
  r.thread_count = 1;
  return r;
}

std::string bench_json(const BenchResult& r) {
  nlohmann::ordered_json j;
  j["geometry"] = {{"in_channels", r.geometry.in_channels},
                   {"out_channels", r.geometry.out_channels},
                   {"kernel", r.geometry.kernel},
                   {"height", r.geometry.height},
                   {"width", r.geometry.width},
                   {"stride", r.geometry.stride},
                   {"padding", r.geometry.padding}};
  j["ns_packed"] = r.ns_packed;
  j["ns_float"] = r.ns_float;
  j["ratio"] = r.ratio;
  j["thread_count"] = r.thread_count;
  j["repetitions"] = r.repetitions;
  j["isa"] = std::string(kernels::isa_name(kernels::active_isa()));
  return j.dump();
}

}  // namespace binet
