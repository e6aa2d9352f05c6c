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

#include <vector>

#include "binet/autograd.hpp"

namespace binet {

/// lr0 * (1 + cos(pi * epoch / total)) / 2. Throws ValueError for total <= 0
/// or a negative lr0.
double cosine_lr(int epoch, int total, double lr0);

/// One momentum update on a single tensor:
///   v <- momentum * v + (grad + weight_decay * param);  param <- param - lr * v
void sgd_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr, double momentum,
              double weight_decay);

/// SGD with momentum over a fixed parameter list; owns one velocity buffer
/// per parameter, zero-initialized.
class Sgd {
 public:
  Sgd(std::vector<Var> params, double momentum, double weight_decay);

  /// Applies the update to every parameter holding a gradient.
  void step(double lr);
  void zero_grad();

  const std::vector<Tensor>& velocities() const noexcept { return velocity_; }
  std::vector<Tensor>& velocities() noexcept { return velocity_; }
  double momentum() const noexcept { return momentum_; }
  double weight_decay() const noexcept { return weight_decay_; }

 private:
  std::vector<Var> params_;
  std::vector<Tensor> velocity_;
  double momentum_;
  double weight_decay_;
};

}  // namespace binet
