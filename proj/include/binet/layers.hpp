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
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "binet/autograd.hpp"
#include "binet/dte.hpp"
#include "binet/imb.hpp"
#include "binet/ops.hpp"

namespace binet {

/// How latent weights become the pre-sign tensor.
enum class WeightBinarizer {
  imb,      ///< (w - mean) / std, shift from round(log2(mean |.|))
  balance,  ///< w - mean only (ablation without standardization)
  vanilla,  ///< sign(w), no shift
};

/// Whether the training forward uses sign() or the smooth surrogate g().
/// The surrogate exists for gradient checking.
enum class ForwardMode { sign, surrogate };

std::string_view to_string(WeightBinarizer b) noexcept;
WeightBinarizer parse_weight_binarizer(std::string_view name);

struct BinarizeOptions {
  WeightBinarizer binarizer = WeightBinarizer::imb;
  ForwardMode forward = ForwardMode::sign;
  bool binarize_activations = true;
};

struct ForwardContext {
  bool training = false;
  BinarizeOptions binarize{};
};

struct NamedParameter {
  std::string name;
  Var var;
};

struct NamedBuffer {
  std::string name;
  Tensor* tensor;
};

class BinaryLayer;

class Module {
 public:
  virtual ~Module() = default;
  virtual Var forward(const Var& x, ForwardContext& ctx) = 0;
  virtual void collect_parameters(const std::string& prefix, std::vector<NamedParameter>& out);
  virtual void collect_buffers(const std::string& prefix, std::vector<NamedBuffer>& out);
  virtual void collect_binary_layers(const std::string& prefix,
                                     std::vector<std::pair<std::string, BinaryLayer*>>& out);
};

class Conv2d : public Module {
 public:
  Conv2d(std::size_t in, std::size_t out, std::size_t kernel, Conv2dGeometry geom,
         std::mt19937_64& rng);
  Var forward(const Var& x, ForwardContext& ctx) override;
  void collect_parameters(const std::string& prefix, std::vector<NamedParameter>& out) override;
  Var& weight() noexcept { return weight_; }
  const Conv2dGeometry& geometry() const noexcept { return geom_; }

 private:
  Var weight_;
  Conv2dGeometry geom_;
};

class Linear : public Module {
 public:
  Linear(std::size_t in, std::size_t out, std::mt19937_64& rng);
  Var forward(const Var& x, ForwardContext& ctx) override;
  void collect_parameters(const std::string& prefix, std::vector<NamedParameter>& out) override;
  Var& weight() noexcept { return weight_; }

 private:
  Var weight_;
};

/// Layer with latent 32-bit weights binarized on every forward pass.
///
/// Forward: Q_w = sign(w_hat) * 2^s and Q_a = sign(x); the output is the
/// conv/linear of Q_a with Q_w. Backward: dL/dw = dL/dQ_w * g'(w_hat) * 2^s
/// and dL/dx = dL/dQ_a * g'(x), with the standardization statistics and the
/// shift held constant.
class BinaryLayer : public Module {
 public:
  struct EpochCounters {
    std::uint64_t act_plus = 0;
    std::uint64_t act_total = 0;
  };

  explicit BinaryLayer(Tensor init_weight);

  Var forward(const Var& x, ForwardContext& ctx) override;
  void collect_parameters(const std::string& prefix, std::vector<NamedParameter>& out) override;
  void collect_binary_layers(const std::string& prefix,
                             std::vector<std::pair<std::string, BinaryLayer*>>& out) override;

  Var& weight() noexcept { return weight_; }
  const Var& weight() const noexcept { return weight_; }

  /// Pre-sign tensor of the current latent weights under `b`.
  Tensor pre_sign(WeightBinarizer b) const;
  /// Signs and shift of the current latent weights under `b`.
  imb::QuantizedWeights quantize(WeightBinarizer b) const;

  const dte::EstimatorState& estimator() const noexcept { return estimator_; }
  void set_estimator(const dte::EstimatorState& s) noexcept { estimator_ = s; }

  EpochCounters& counters() noexcept { return counters_; }
  /// Shift used by the most recent forward pass.
  int last_shift() const noexcept { return last_shift_; }

  virtual bool is_linear() const noexcept = 0;
  /// Geometry for conv layers; linear layers report the default 1x1 geometry.
  virtual Conv2dGeometry geometry() const noexcept { return {}; }

 protected:
  virtual Var apply(const Var& q_a, const Var& q_w) const = 0;

 private:
  Var weight_;
  dte::EstimatorState estimator_{};
  EpochCounters counters_{};
  int last_shift_ = 0;
};

class BinaryConv2d : public BinaryLayer {
 public:
  BinaryConv2d(std::size_t in, std::size_t out, std::size_t kernel, Conv2dGeometry geom,
               std::mt19937_64& rng);
  bool is_linear() const noexcept override { return false; }
  Conv2dGeometry geometry() const noexcept override { return geom_; }

 protected:
  Var apply(const Var& q_a, const Var& q_w) const override;

 private:
  Conv2dGeometry geom_;
};

class BinaryLinear : public BinaryLayer {
 public:
  BinaryLinear(std::size_t in, std::size_t out, std::mt19937_64& rng);
  bool is_linear() const noexcept override { return true; }

 protected:
  Var apply(const Var& q_a, const Var& q_w) const override;
};

class BatchNorm : public Module {
 public:
  explicit BatchNorm(std::size_t channels);
  Var forward(const Var& x, ForwardContext& ctx) override;
  void collect_parameters(const std::string& prefix, std::vector<NamedParameter>& out) override;
  void collect_buffers(const std::string& prefix, std::vector<NamedBuffer>& out) override;

  Var& gamma() noexcept { return gamma_; }
  Var& beta() noexcept { return beta_; }
  BatchNormStats& stats() noexcept { return stats_; }

 private:
  Var gamma_;
  Var beta_;
  BatchNormStats stats_;
};

class Hardtanh : public Module {
 public:
  Var forward(const Var& x, ForwardContext& ctx) override;
};

class MaxPool : public Module {
 public:
  MaxPool(std::size_t kernel, std::size_t stride) : kernel_(kernel), stride_(stride) {}
  Var forward(const Var& x, ForwardContext& ctx) override;
  std::size_t kernel() const noexcept { return kernel_; }
  std::size_t stride() const noexcept { return stride_; }

 private:
  std::size_t kernel_;
  std::size_t stride_;
};

class GlobalAvgPool : public Module {
 public:
  Var forward(const Var& x, ForwardContext& ctx) override;
};

class Flatten : public Module {
 public:
  Var forward(const Var& x, ForwardContext& ctx) override;
};

/// hardtanh(bn(conv(x)) + shortcut(x)); the shortcut is identity or a
/// full-precision 1x1 conv + bn when shape changes.
class ResidualUnit : public Module {
 public:
  ResidualUnit(std::size_t in, std::size_t out, std::size_t stride, bool binarize,
               std::mt19937_64& rng);
  Var forward(const Var& x, ForwardContext& ctx) override;
  void collect_parameters(const std::string& prefix, std::vector<NamedParameter>& out) override;
  void collect_buffers(const std::string& prefix, std::vector<NamedBuffer>& out) override;
  void collect_binary_layers(const std::string& prefix,
                             std::vector<std::pair<std::string, BinaryLayer*>>& out) override;

  Module& conv() noexcept { return *conv_; }
  BatchNorm& bn() noexcept { return *bn_; }
  Conv2d* shortcut_conv() noexcept { return shortcut_conv_.get(); }
  BatchNorm* shortcut_bn() noexcept { return shortcut_bn_.get(); }

 private:
  std::unique_ptr<Module> conv_;
  std::unique_ptr<BatchNorm> bn_;
  std::unique_ptr<Conv2d> shortcut_conv_;
  std::unique_ptr<BatchNorm> shortcut_bn_;
};

}  // namespace binet
