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

#include "binet/layers.hpp"

namespace binet {

enum class LayerKind { conv, linear, batch_norm, hardtanh, max_pool, avg_pool, flatten, res_unit };

std::string_view to_string(LayerKind k) noexcept;
LayerKind parse_layer_kind(std::string_view name);

/// One entry of a model description. Field use by kind:
///   conv      in, out, kernel, stride, padding, binarize
///   linear    in, out, binarize
///   batch_norm  out (channels)
///   max_pool  kernel, stride
///   res_unit  in, out, stride, binarize (3x3 conv, pad 1)
struct LayerSpec {
  LayerKind kind = LayerKind::hardtanh;
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
  bool binarize = false;

  bool parameterized() const noexcept {
    return kind == LayerKind::conv || kind == LayerKind::linear || kind == LayerKind::res_unit;
  }
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ModelSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  Shape input;  ///< C, H, W of one sample
  std::size_t classes = 0;

  /// Checks the layer chain against `input` and that the first and last
  /// parameterized layers are full precision. Throws ShapeError/ConfigError.
  void validate() const;
  /// Per-sample output shape of every layer, in order.
  std::vector<Shape> layer_output_shapes() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Names accepted by make_model_spec.
std::vector<std::string> model_zoo_names();

/// Built-in topologies: "mlp" (two binarized hidden layers between
/// full-precision input/output layers), "cnn4" (desk-scale 4-layer CNN),
/// "vgg_small", "resnet20".
ModelSpec make_model_spec(std::string_view name, const Shape& input_chw, std::size_t classes);

class Model {
 public:
  Model(ModelSpec spec, std::uint64_t seed);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  const ModelSpec& spec() const noexcept { return spec_; }
  BinarizeOptions& binarize_options() noexcept { return options_; }
  const BinarizeOptions& binarize_options() const noexcept { return options_; }

  Var forward(const Var& x, bool training);
  /// Eval-mode logits without recording a tape.
  Tensor logits(const Tensor& x);

  std::vector<NamedParameter> parameters() const;
  std::vector<NamedBuffer> buffers() const;
  std::vector<std::pair<std::string, BinaryLayer*>> binary_layers() const;

  std::size_t size() const noexcept { return modules_.size(); }
  Module& module(std::size_t i) { return *modules_.at(i); }

 private:
  ModelSpec spec_;
  std::vector<std::unique_ptr<Module>> modules_;
  BinarizeOptions options_{};
};

}  // namespace binet
