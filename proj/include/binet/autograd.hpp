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

#include <functional>
#include <initializer_list>
#include <memory>
#include <vector>

#include "binet/tensor.hpp"

namespace binet {

/// One vertex of the eager tape. `backward` reads this node's accumulated
/// gradient and adds the contribution of each parent into the parent's grad.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;
  const char* op = "leaf";

  /// grad += g, allocating a zero buffer on first use.
  void accumulate(const Tensor& g);
  /// Gradient buffer, zero-initialized on first access.
  Tensor& grad_buffer();
};

/// Handle to a tape node. Copies share the node.
class Var {
 public:
  Var() = default;

  static Var leaf(Tensor value, bool requires_grad = true);
  static Var constant(Tensor value) { return leaf(std::move(value), false); }

  /// Builds an interior node. `backward` is dropped (and the parents are not
  /// retained) when gradient tracking is off or no input requires a gradient.
  static Var make(Tensor value, std::initializer_list<Var> inputs, const char* op,
                  std::function<void(Node&)> backward);

  bool defined() const noexcept { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
  bool has_grad() const noexcept { return node_ && !node_->grad.empty(); }
  const Tensor& grad() const { return node_->grad; }
  void zero_grad();
  const std::shared_ptr<Node>& node() const noexcept { return node_; }

 private:
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

/// True when ops should record backward closures (default on).
bool grad_enabled() noexcept;

/// Disables tape recording for the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// True when a node built from `inputs` would be recorded on the tape.
bool tracks_grad(std::initializer_list<Var> inputs) noexcept;

/// Reverse-mode sweep from a scalar loss. Every node reachable from `loss`
/// is visited once, in reverse topological order; gradients accumulate
/// additively across fan-out. Throws ShapeError for a non-scalar loss.
void backward(const Var& loss);

using ElementwiseFn = std::function<float(float)>;

/// Node whose value is forward_fn(x) elementwise and whose backward multiplies
/// the incoming gradient by backward_fn(x), x being the saved input.
Var custom_grad(const Var& input, const ElementwiseFn& forward_fn,
                const ElementwiseFn& backward_fn);

/// Same contract with both halves precomputed: `forward_value` is the node's
/// value and `local_derivative` the elementwise factor applied in backward.
Var custom_grad(const Var& input, Tensor forward_value, Tensor local_derivative);

}  // namespace binet
