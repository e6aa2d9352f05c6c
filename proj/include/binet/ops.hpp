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
#include <span>
#include <utility>

#include "binet/autograd.hpp"

namespace binet {

struct Conv2dGeometry {
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
  std::size_t pad_h = 0;
  std::size_t pad_w = 0;

  static Conv2dGeometry square(std::size_t stride, std::size_t pad) {
    return {stride, stride, pad, pad};
  }
  friend bool operator==(const Conv2dGeometry&, const Conv2dGeometry&) = default;
};

/// Output spatial extent for one axis; throws ShapeError when the window does
/// not fit.
std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                            std::size_t pad);

/// Cross-correlation of NCHW input with OIHW weight, zero padding, no bias.
Var conv2d(const Var& input, const Var& weight, const Conv2dGeometry& geom);

/// Forward-only convolution on plain tensors (same kernel path as conv2d).
Tensor conv2d_forward(const Tensor& input, const Tensor& weight, const Conv2dGeometry& geom);

/// input N x (anything) is flattened to N x I; weight is O x I; no bias.
Var linear(const Var& input, const Var& weight);
Tensor linear_forward(const Tensor& input, const Tensor& weight);

/// Running statistics owned by a batch-norm layer.
struct BatchNormStats {
  Tensor running_mean;
  Tensor running_var;
  float momentum = 0.1f;
  float eps = 1e-5f;

  explicit BatchNormStats(std::size_t channels = 0)
      : running_mean(Tensor::zeros({channels})), running_var(Tensor::ones({channels})) {}
};

/// Per-channel y = x * scale + shift equivalent of eval-mode batch norm.
std::pair<Tensor, Tensor> batch_norm_fold(const Tensor& gamma, const Tensor& beta,
                                          const BatchNormStats& stats);

/// Applies a per-channel affine to N x C (x H x W) data. The one routine used
/// for eval batch norm both in training models and in deployment.
Tensor channel_affine(const Tensor& x, std::span<const float> scale, std::span<const float> shift);

/// Batch normalization over N x C or N x C x H x W. Train mode normalizes with
/// batch statistics (64-bit accumulation) and updates the running estimates;
/// eval mode applies the folded affine.
Var batch_norm(const Var& input, const Var& gamma, const Var& beta, BatchNormStats& stats,
               bool training);

/// Clamp to [-1, 1]; gradient passes where -1 < x < 1.
Var hardtanh(const Var& input);
Tensor hardtanh_forward(const Tensor& x);

Var max_pool2d(const Var& input, std::size_t kernel, std::size_t stride);
Tensor max_pool2d_forward(const Tensor& input, std::size_t kernel, std::size_t stride);

/// N x C x H x W -> N x C by spatial mean.
Var global_avg_pool(const Var& input);
Tensor global_avg_pool_forward(const Tensor& input);

Var flatten(const Var& input);
Var add(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, float factor);
Var tanh(const Var& x);
Var sum(const Var& x);

/// Mean softmax cross-entropy of N x C logits; labels must lie in [0, C).
Var cross_entropy(const Var& logits, std::span<const int> labels);

/// Row-major transpose of a rows x cols matrix.
void transpose(const float* src, std::size_t rows, std::size_t cols, float* dst);

}  // namespace binet
