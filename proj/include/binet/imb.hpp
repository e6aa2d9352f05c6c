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

#include <span>

#include "binet/tensor.hpp"

/// Information-maximizing weight/activation binarization: standardize and
/// balance latent weights, quantize to sign * 2^s with an integer shift, and
/// the entropy / error diagnostics that go with it.
namespace binet::imb {

/// Floor applied to the population standard deviation of degenerate tensors.
inline constexpr double kSigmaFloor = 1e-12;

struct Standardized {
  Tensor values;  ///< (w - mean) / stddev
  double mean = 0.0;
  double stddev = 1.0;  ///< population std, floored at kSigmaFloor
};

/// Per-tensor standardization with its statistics. Throws ValueError on an
/// empty tensor.
Standardized standardize(const Tensor& w);

/// (w - mean(w)) / sigma(w) over the whole tensor.
Tensor standardize_balance(const Tensor& w);

/// round(log2(mean |w_std|)), ties away from zero; 0 when every element is 0.
int shift_scalar(std::span<const float> w_std);

/// sign with sign(0) = +1.
inline float sign(float x) noexcept { return x >= 0.0f ? 1.0f : -1.0f; }

struct QuantizedWeights {
  Tensor signs;  ///< every element is -1 or +1
  int shift = 0;
  Shape source_shape;

  /// signs * 2^shift, exactly.
  Tensor dequantized() const;
};

QuantizedWeights binarize_weights(const Tensor& w);

/// Same quantization applied to an already standardized tensor.
QuantizedWeights quantize_standardized(const Tensor& w_std);

/// Elementwise sign, no scaling.
Tensor binarize_activations(const Tensor& a);

/// Bernoulli entropy in nats of a {-1,+1} tensor, from its +1 fraction.
double binary_entropy(const Tensor& signs);
double binary_entropy_from_p(double p_plus) noexcept;
double plus_fraction(const Tensor& signs);

struct QuantizationError {
  double l1 = 0.0;
  double l2 = 0.0;
};

/// l1 = sum |q - x|, l2 = sum (q - x)^2. Throws ShapeError on mismatch.
QuantizationError quantization_error(const Tensor& x, const Tensor& q);

struct BinarizerReport {
  double entropy_nats = 0.0;
  double p_plus = 0.0;
  double error_l1 = 0.0;
  double error_l2 = 0.0;
};

/// Diagnostics of binarize_weights(w): entropy of the signs and the error of
/// sign * 2^s against the standardized weights.
BinarizerReport report(const Tensor& w);

}  // namespace binet::imb
