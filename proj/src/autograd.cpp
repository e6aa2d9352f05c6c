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

#include "binet/autograd.hpp"

#include <unordered_set>
#include <utility>

#include "binet/error.hpp"

namespace binet {
namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

void Node::accumulate(const Tensor& g) {
  if (grad.empty()) {
    require_same_shape(value, g, "gradient accumulation");
    grad = g;
    return;
  }
  grad.add_(g);
}

Tensor& Node::grad_buffer() {
  if (grad.empty()) grad = Tensor::zeros(value.shape());
  return grad;
}

Var Var::leaf(Tensor value, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  return Var(std::move(node));
}

Var Var::make(Tensor value, std::initializer_list<Var> inputs, const char* op,
              std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = op;
  if (tracks_grad(inputs)) {
    node->requires_grad = true;
    node->parents.reserve(inputs.size());
    for (const Var& in : inputs) node->parents.push_back(in.node_);
    node->backward = std::move(backward);
  }
  return Var(std::move(node));
}

void Var::zero_grad() {
  if (node_) node_->grad = Tensor();
}

bool grad_enabled() noexcept { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool tracks_grad(std::initializer_list<Var> inputs) noexcept {
  if (!g_grad_enabled) return false;
  for (const Var& in : inputs) {
    if (in.requires_grad()) return true;
  }
  return false;
}

void backward(const Var& loss) {
  if (!loss.defined() || loss.value().numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " +
                     (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  }
  // Iterative post-order DFS gives a topological order without recursion
  // depth limits on deep tapes.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }

  loss.node()->accumulate(Tensor(loss.shape(), 1.0f));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
}

Var custom_grad(const Var& input, const ElementwiseFn& forward_fn,
                const ElementwiseFn& backward_fn) {
  const Tensor& x = input.value();
  Tensor out(x.shape());
  Tensor deriv(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    out[i] = forward_fn(x[i]);
    deriv[i] = backward_fn(x[i]);
  }
  return custom_grad(input, std::move(out), std::move(deriv));
}

Var custom_grad(const Var& input, Tensor forward_value, Tensor local_derivative) {
  require_same_shape(input.value(), forward_value, "custom_grad forward");
  require_same_shape(input.value(), local_derivative, "custom_grad derivative");
  return Var::make(std::move(forward_value), {input}, "custom_grad",
                   [deriv = std::move(local_derivative)](Node& self) {
                     Node& parent = *self.parents[0];
                     if (!parent.requires_grad) return;
                     Tensor& pg = parent.grad_buffer();
                     for (std::size_t i = 0; i < deriv.numel(); ++i) {
                       pg[i] += self.grad[i] * deriv[i];
                     }
                   });
}

}  // namespace binet
