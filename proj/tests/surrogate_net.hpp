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

// Gradient check of a two-layer binarized network in which sign() is
// replaced by the smooth surrogate g(x) = k tanh(t x) in the forward pass.
// The layer's backward rule holds the standardization statistics and the
// shift fixed, so its weight gradient is the derivative of the loss with
// respect to the standardized weights w_hat. The oracle differentiates a
// 64-bit re-implementation of the same loss in w_hat directly.

#include <cmath>
#include <random>
#include <vector>

#include "binet/layers.hpp"
#include "binet/ops.hpp"
#include "oracles.hpp"

namespace oracle {

struct SurrogateCheck {
  double error_layer1 = 0.0;
  double error_layer2 = 0.0;
  double worst() const { return std::max(error_layer1, error_layer2); }
};

inline SurrogateCheck surrogate_net_check(std::uint64_t seed, double t) {
  using namespace binet;
  std::mt19937_64 rng(seed);
  const std::size_t n = 8, in = 6, hidden = 10, classes = 3;
  const double k = std::max(1.0 / t, 1.0);

  BinaryLinear l1(in, hidden, rng), l2(hidden, classes, rng);
  dte::EstimatorState est;
  est.t = t;
  est.k = k;
  l1.set_estimator(est);
  l2.set_estimator(est);

  const Tensor x = Tensor::randn({n, in}, rng);
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(rng() % classes);

  ForwardContext ctx;
  ctx.training = true;
  ctx.binarize.forward = ForwardMode::surrogate;
  const Var loss = cross_entropy(l2.forward(l1.forward(Var::constant(x), ctx), ctx), labels);
  backward(loss);
  const int s1 = l1.last_shift(), s2 = l2.last_shift();

  auto g = [&](double v) { return k * std::tanh(t * v); };
  auto shadow = [&](const DTensor& w1, const DTensor& w2) {
    DTensor a(x);
    for (double& v : a.v) v = g(v);
    DTensor q1 = w1, q2 = w2;
    for (double& v : q1.v) v = g(v) * std::ldexp(1.0, s1);
    for (double& v : q2.v) v = g(v) * std::ldexp(1.0, s2);
    DTensor h = linear(a, q1);
    for (double& v : h.v) v = g(v);
    return cross_entropy(linear(h, q2), labels);
  };

  auto w_hat = [](const Var& w) {
    DTensor d(w.value());
    d.v = standardize(d.v);
    return d;
  };
  const DTensor w1 = w_hat(l1.weight()), w2 = w_hat(l2.weight());
  const auto fd1 = central_difference([&](const DTensor& v) { return shadow(v, w2); }, w1);
  const auto fd2 = central_difference([&](const DTensor& v) { return shadow(w1, v); }, w2);
  return {relative_error(l1.weight().grad().data(), fd1),
          relative_error(l2.weight().grad().data(), fd2)};
}

}  // namespace oracle
