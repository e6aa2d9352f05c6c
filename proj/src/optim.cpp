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

#include "binet/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "binet/error.hpp"

namespace binet {

double cosine_lr(int epoch, int total, double lr0) {
  if (total <= 0) throw ValueError("cosine_lr: total epochs must be positive");
  if (lr0 < 0.0) throw ValueError("cosine_lr: negative learning rate");
  const double phase = std::numbers::pi * static_cast<double>(epoch) / static_cast<double>(total);
  const double lr = lr0 * (1.0 + std::cos(phase)) / 2.0;
  return lr < 0.0 ? 0.0 : lr;
}

void sgd_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr, double momentum,
              double weight_decay) {
  if (lr < 0.0) throw ValueError("sgd_step: negative learning rate " + std::to_string(lr));
  require_same_shape(param, grad, "sgd_step grad");
  require_same_shape(param, velocity, "sgd_step velocity");
  const float m = static_cast<float>(momentum);
  const float wd = static_cast<float>(weight_decay);
  const float step = static_cast<float>(lr);
  for (std::size_t i = 0; i < param.numel(); ++i) {
    velocity[i] = m * velocity[i] + (grad[i] + wd * param[i]);
    param[i] -= step * velocity[i];
  }
}

Sgd::Sgd(std::vector<Var> params, double momentum, double weight_decay)
    : params_(std::move(params)), momentum_(momentum), weight_decay_(weight_decay) {
  velocity_.reserve(params_.size());
  for (const Var& p : params_) velocity_.push_back(Tensor::zeros(p.shape()));
}

void Sgd::step(double lr) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Var& p = params_[i];
    if (!p.has_grad()) continue;
    sgd_step(p.mutable_value(), p.grad(), velocity_[i], lr, momentum_, weight_decay_);
  }
}

void Sgd::zero_grad() {
  for (Var& p : params_) p.zero_grad();
}

}  // namespace binet
