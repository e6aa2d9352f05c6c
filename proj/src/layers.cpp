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

#include "binet/layers.hpp"

#include <cmath>

#include "binet/error.hpp"

namespace binet {
namespace {

Tensor kaiming(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  const float stddev = std::sqrt(2.0f / static_cast<float>(fan_in));
  return Tensor::randn(std::move(shape), rng, 0.0f, stddev);
}

}  // namespace

std::string_view to_string(WeightBinarizer b) noexcept {
  switch (b) {
    case WeightBinarizer::imb: return "imb";
    case WeightBinarizer::balance: return "balance";
    case WeightBinarizer::vanilla: return "vanilla";
  }
  return "imb";
}

WeightBinarizer parse_weight_binarizer(std::string_view name) {
  if (name == "imb") return WeightBinarizer::imb;
  if (name == "balance") return WeightBinarizer::balance;
  if (name == "vanilla") return WeightBinarizer::vanilla;
  throw ConfigError("unknown binarizer '" + std::string(name) +
                    "' (expected imb, balance or vanilla)");
}

void Module::collect_parameters(const std::string&, std::vector<NamedParameter>&) {}
void Module::collect_buffers(const std::string&, std::vector<NamedBuffer>&) {}
void Module::collect_binary_layers(const std::string&,
                                   std::vector<std::pair<std::string, BinaryLayer*>>&) {}

Conv2d::Conv2d(std::size_t in, std::size_t out, std::size_t kernel, Conv2dGeometry geom,
               std::mt19937_64& rng)
    : weight_(Var::leaf(kaiming({out, in, kernel, kernel}, in * kernel * kernel, rng))),
      geom_(geom) {}

Var Conv2d::forward(const Var& x, ForwardContext&) { return conv2d(x, weight_, geom_); }

void Conv2d::collect_parameters(const std::string& prefix, std::vector<NamedParameter>& out) {
  out.push_back({prefix + "weight", weight_});
}

Linear::Linear(std::size_t in, std::size_t out, std::mt19937_64& rng)
    : weight_(Var::leaf(kaiming({out, in}, in, rng))) {}

Var Linear::forward(const Var& x, ForwardContext&) { return linear(x, weight_); }

void Linear::collect_parameters(const std::string& prefix, std::vector<NamedParameter>& out) {
  out.push_back({prefix + "weight", weight_});
}

BinaryLayer::BinaryLayer(Tensor init_weight) : weight_(Var::leaf(std::move(init_weight))) {}

Tensor BinaryLayer::pre_sign(WeightBinarizer b) const {
  const Tensor& w = weight_.value();
  switch (b) {
    case WeightBinarizer::imb:
      return imb::standardize_balance(w);
    case WeightBinarizer::balance: {
      if (w.empty()) throw ValueError("binarize: empty weight tensor");
      double sum = 0.0;
      for (float v : w.data()) sum += v;
      const auto mean = static_cast<float>(sum / static_cast<double>(w.numel()));
      Tensor out(w.shape());
      for (std::size_t i = 0; i < w.numel(); ++i) out[i] = w[i] - mean;
      return out;
    }
    case WeightBinarizer::vanilla:
      return w;
  }
  return w;
}

imb::QuantizedWeights BinaryLayer::quantize(WeightBinarizer b) const {
  imb::QuantizedWeights q = imb::quantize_standardized(pre_sign(b));
  if (b == WeightBinarizer::vanilla) q.shift = 0;
  return q;
}

Var BinaryLayer::forward(const Var& x, ForwardContext& ctx) {
  const BinarizeOptions& opt = ctx.binarize;
  const Tensor w_hat = pre_sign(opt.binarizer);
  const int shift = opt.binarizer == WeightBinarizer::vanilla ? 0 : imb::shift_scalar(w_hat.data());
  last_shift_ = shift;
  const float scale = std::ldexp(1.0f, shift);
  const bool surrogate = opt.forward == ForwardMode::surrogate;

  Tensor qw(w_hat.shape());
  for (std::size_t i = 0; i < qw.numel(); ++i) {
    qw[i] = (surrogate ? estimator_.surrogate(w_hat[i]) : imb::sign(w_hat[i])) * scale;
  }
  Var q_w;
  if (tracks_grad({weight_})) {
    Tensor deriv(w_hat.shape());
    for (std::size_t i = 0; i < deriv.numel(); ++i) {
      deriv[i] = estimator_.derivative(w_hat[i]) * scale;
    }
    q_w = custom_grad(weight_, std::move(qw), std::move(deriv));
  } else {
    q_w = Var::constant(std::move(qw));
  }

  Var q_a = x;
  if (opt.binarize_activations) {
    const Tensor& a = x.value();
    Tensor qa(a.shape());
    std::uint64_t plus = 0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
      const float s = imb::sign(a[i]);
      plus += s > 0.0f ? 1 : 0;
      qa[i] = surrogate ? estimator_.surrogate(a[i]) : s;
    }
    if (ctx.training) {
      counters_.act_plus += plus;
      counters_.act_total += a.numel();
    }
    if (tracks_grad({x})) {
      Tensor deriv(a.shape());
      for (std::size_t i = 0; i < a.numel(); ++i) deriv[i] = estimator_.derivative(a[i]);
      q_a = custom_grad(x, std::move(qa), std::move(deriv));
    } else {
      q_a = Var::constant(std::move(qa));
    }
  }
  return apply(q_a, q_w);
}

void BinaryLayer::collect_parameters(const std::string& prefix, std::vector<NamedParameter>& out) {
  out.push_back({prefix + "weight", weight_});
}

void BinaryLayer::collect_binary_layers(const std::string& prefix,
                                        std::vector<std::pair<std::string, BinaryLayer*>>& out) {
  std::string name = prefix;
  if (!name.empty() && name.back() == '.') name.pop_back();
  out.emplace_back(std::move(name), this);
}

BinaryConv2d::BinaryConv2d(std::size_t in, std::size_t out, std::size_t kernel,
                           Conv2dGeometry geom, std::mt19937_64& rng)
    : BinaryLayer(kaiming({out, in, kernel, kernel}, in * kernel * kernel, rng)), geom_(geom) {}

Var BinaryConv2d::apply(const Var& q_a, const Var& q_w) const { return conv2d(q_a, q_w, geom_); }

BinaryLinear::BinaryLinear(std::size_t in, std::size_t out, std::mt19937_64& rng)
    : BinaryLayer(kaiming({out, in}, in, rng)) {}

Var BinaryLinear::apply(const Var& q_a, const Var& q_w) const { return linear(q_a, q_w); }

BatchNorm::BatchNorm(std::size_t channels)
    : gamma_(Var::leaf(Tensor::ones({channels}))),
      beta_(Var::leaf(Tensor::zeros({channels}))),
      stats_(channels) {}

Var BatchNorm::forward(const Var& x, ForwardContext& ctx) {
  return batch_norm(x, gamma_, beta_, stats_, ctx.training);
}

void BatchNorm::collect_parameters(const std::string& prefix, std::vector<NamedParameter>& out) {
  out.push_back({prefix + "gamma", gamma_});
  out.push_back({prefix + "beta", beta_});
}

void BatchNorm::collect_buffers(const std::string& prefix, std::vector<NamedBuffer>& out) {
  out.push_back({prefix + "running_mean", &stats_.running_mean});
  out.push_back({prefix + "running_var", &stats_.running_var});
}

Var Hardtanh::forward(const Var& x, ForwardContext&) { return hardtanh(x); }

Var MaxPool::forward(const Var& x, ForwardContext&) { return max_pool2d(x, kernel_, stride_); }

Var GlobalAvgPool::forward(const Var& x, ForwardContext&) { return global_avg_pool(x); }

Var Flatten::forward(const Var& x, ForwardContext&) { return flatten(x); }

ResidualUnit::ResidualUnit(std::size_t in, std::size_t out, std::size_t stride, bool binarize,
                           std::mt19937_64& rng)
    : bn_(std::make_unique<BatchNorm>(out)) {
  const auto geom = Conv2dGeometry::square(stride, 1);
  if (binarize) {
    conv_ = std::make_unique<BinaryConv2d>(in, out, 3, geom, rng);
  } else {
    conv_ = std::make_unique<Conv2d>(in, out, 3, geom, rng);
  }
  if (stride != 1 || in != out) {
    shortcut_conv_ = std::make_unique<Conv2d>(in, out, 1, Conv2dGeometry::square(stride, 0), rng);
    shortcut_bn_ = std::make_unique<BatchNorm>(out);
  }
}

Var ResidualUnit::forward(const Var& x, ForwardContext& ctx) {
  Var main = bn_->forward(conv_->forward(x, ctx), ctx);
  Var skip = x;
  if (shortcut_conv_) skip = shortcut_bn_->forward(shortcut_conv_->forward(x, ctx), ctx);
  return hardtanh(add(main, skip));
}

void ResidualUnit::collect_parameters(const std::string& prefix, std::vector<NamedParameter>& out) {
  conv_->collect_parameters(prefix + "conv.", out);
  bn_->collect_parameters(prefix + "bn.", out);
  if (shortcut_conv_) {
    shortcut_conv_->collect_parameters(prefix + "shortcut.conv.", out);
    shortcut_bn_->collect_parameters(prefix + "shortcut.bn.", out);
  }
}

void ResidualUnit::collect_buffers(const std::string& prefix, std::vector<NamedBuffer>& out) {
  bn_->collect_buffers(prefix + "bn.", out);
  if (shortcut_bn_) shortcut_bn_->collect_buffers(prefix + "shortcut.bn.", out);
}

void ResidualUnit::collect_binary_layers(const std::string& prefix,
                                         std::vector<std::pair<std::string, BinaryLayer*>>& out) {
  conv_->collect_binary_layers(prefix + "conv.", out);
}

}  // namespace binet
