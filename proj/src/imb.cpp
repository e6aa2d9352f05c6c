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

#include "binet/imb.hpp"

#include <cmath>

#include "binet/error.hpp"

namespace binet::imb {

Standardized standardize(const Tensor& w) {
  if (w.empty()) throw ValueError("standardize_balance: empty tensor");
  const double n = static_cast<double>(w.numel());
  double sum = 0.0;
  for (float v : w.data()) sum += v;
  const double mean = sum / n;
  double sq = 0.0;
  for (float v : w.data()) {
    const double d = v - mean;
    sq += d * d;
  }
  double sigma = std::sqrt(sq / n);
  if (sigma < kSigmaFloor) sigma = kSigmaFloor;

  Standardized out{Tensor(w.shape()), mean, sigma};
  for (std::size_t i = 0; i < w.numel(); ++i) {
    out.values[i] = static_cast<float>((w[i] - mean) / sigma);
  }
  return out;
}

Tensor standardize_balance(const Tensor& w) { return standardize(w).values; }

int shift_scalar(std::span<const float> w_std) {
  if (w_std.empty()) return 0;
  double l1 = 0.0;
  for (float v : w_std) l1 += std::fabs(v);
  if (l1 == 0.0) return 0;
  // std::round rounds halfway cases away from zero.
  return static_cast<int>(std::round(std::log2(l1 / static_cast<double>(w_std.size()))));
}

Tensor QuantizedWeights::dequantized() const {
  Tensor q(signs.shape());
  for (std::size_t i = 0; i < q.numel(); ++i) q[i] = std::ldexp(signs[i], shift);
  return q;
}

QuantizedWeights quantize_standardized(const Tensor& w_std) {
  QuantizedWeights q{binarize_activations(w_std), shift_scalar(w_std.data()), w_std.shape()};
  return q;
}

QuantizedWeights binarize_weights(const Tensor& w) {
  return quantize_standardized(standardize_balance(w));
}

Tensor binarize_activations(const Tensor& a) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = sign(a[i]);
  return out;
}

double plus_fraction(const Tensor& signs) {
  if (signs.empty()) throw ValueError("binary_entropy: empty tensor");
  std::size_t plus = 0;
  for (float v : signs.data()) plus += v > 0.0f ? 1 : 0;
  return static_cast<double>(plus) / static_cast<double>(signs.numel());
}

double binary_entropy_from_p(double p) noexcept {
  auto term = [](double q) { return q > 0.0 ? -q * std::log(q) : 0.0; };
  return term(p) + term(1.0 - p);
}

double binary_entropy(const Tensor& signs) { return binary_entropy_from_p(plus_fraction(signs)); }

QuantizationError quantization_error(const Tensor& x, const Tensor& q) {
  require_same_shape(x, q, "quantization_error");
  QuantizationError e;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double d = static_cast<double>(q[i]) - x[i];
    e.l1 += std::fabs(d);
    e.l2 += d * d;
  }
  return e;
}

BinarizerReport report(const Tensor& w) {
  const Tensor w_std = standardize_balance(w);
  const QuantizedWeights q = quantize_standardized(w_std);
  const QuantizationError err = quantization_error(w_std, q.dequantized());
  const double p = plus_fraction(q.signs);
  return {binary_entropy_from_p(p), p, err.l1, err.l2};
}

}  // namespace binet::imb
