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

#include "binet/model.hpp"

#include <random>

#include "binet/error.hpp"

namespace binet {

std::string_view to_string(LayerKind k) noexcept {
  switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::linear: return "linear";
    case LayerKind::batch_norm: return "batch_norm";
    case LayerKind::hardtanh: return "hardtanh";
    case LayerKind::max_pool: return "max_pool";
    case LayerKind::avg_pool: return "avg_pool";
    case LayerKind::flatten: return "flatten";
    case LayerKind::res_unit: return "res_unit";
  }
  return "hardtanh";
}

LayerKind parse_layer_kind(std::string_view name) {
  for (LayerKind k : {LayerKind::conv, LayerKind::linear, LayerKind::batch_norm,
                      LayerKind::hardtanh, LayerKind::max_pool, LayerKind::avg_pool,
                      LayerKind::flatten, LayerKind::res_unit}) {
    if (to_string(k) == name) return k;
  }
  throw FormatError("unknown layer kind '" + std::string(name) + "'");
}

std::vector<Shape> ModelSpec::layer_output_shapes() const {
  if (input.size() != 3) throw ShapeError("model input must be C x H x W");
  std::vector<Shape> shapes;
  Shape cur = input;
  auto fail = [&](std::size_t i, const std::string& why) {
    throw ShapeError("layer " + std::to_string(i) + " (" + std::string(to_string(layers[i].kind)) +
                     "): " + why + ", input " + shape_str(cur));
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    switch (l.kind) {
      case LayerKind::conv:
      case LayerKind::res_unit: {
        if (cur.size() != 3) fail(i, "needs a C x H x W input");
        if (cur[0] != l.in) fail(i, "expects " + std::to_string(l.in) + " channels");
        const std::size_t k = l.kind == LayerKind::conv ? l.kernel : 3;
        const std::size_t pad = l.kind == LayerKind::conv ? l.padding : 1;
        if (l.stride == 0) fail(i, "stride must be positive");
        cur = {l.out, conv_out_extent(cur[1], k, l.stride, pad),
               conv_out_extent(cur[2], k, l.stride, pad)};
        break;
      }
      case LayerKind::linear: {
        const std::size_t features = shape_numel(cur);
        if (features != l.in) fail(i, "expects " + std::to_string(l.in) + " features");
        cur = {l.out};
        break;
      }
      case LayerKind::batch_norm:
        if (cur.empty() || cur[0] != l.out) fail(i, "channel count " + std::to_string(l.out));
        break;
      case LayerKind::hardtanh:
        break;
      case LayerKind::max_pool:
        if (cur.size() != 3) fail(i, "needs a C x H x W input");
        if (l.stride == 0) fail(i, "stride must be positive");
        cur = {cur[0], conv_out_extent(cur[1], l.kernel, l.stride, 0),
               conv_out_extent(cur[2], l.kernel, l.stride, 0)};
        break;
      case LayerKind::avg_pool:
        if (cur.size() != 3) fail(i, "needs a C x H x W input");
        cur = {cur[0]};
        break;
      case LayerKind::flatten:
        cur = {shape_numel(cur)};
        break;
    }
    shapes.push_back(cur);
  }
  return shapes;
}

void ModelSpec::validate() const {
  if (layers.empty()) throw ConfigError("model '" + name + "' has no layers");
  if (classes == 0) throw ConfigError("model '" + name + "' has zero classes");
  const auto shapes = layer_output_shapes();
  const Shape& last = shapes.back();
  if (shape_numel(last) != classes) {
    throw ShapeError("model '" + name + "' produces " + shape_str(last) + " but has " +
                     std::to_string(classes) + " classes");
  }
  const LayerSpec* first_param = nullptr;
  const LayerSpec* last_param = nullptr;
  for (const LayerSpec& l : layers) {
    if (!l.parameterized()) continue;
    if (!first_param) first_param = &l;
    last_param = &l;
  }
  if (first_param && (first_param->binarize || last_param->binarize)) {
    throw ConfigError("model '" + name +
                      "': first and last parameterized layers must be full precision");
  }
}

std::vector<std::string> model_zoo_names() { return {"mlp", "cnn4", "vgg_small", "resnet20"}; }

namespace {

LayerSpec conv(std::size_t in, std::size_t out, std::size_t k, std::size_t stride,
               std::size_t pad, bool bin) {
  return {LayerKind::conv, in, out, k, stride, pad, bin};
}
LayerSpec linear(std::size_t in, std::size_t out, bool bin) {
  return {LayerKind::linear, in, out, 0, 1, 0, bin};
}
LayerSpec bn(std::size_t c) { return {LayerKind::batch_norm, 0, c, 0, 1, 0, false}; }
LayerSpec act() { return {LayerKind::hardtanh}; }
LayerSpec pool(std::size_t k) { return {LayerKind::max_pool, 0, 0, k, k, 0, false}; }
LayerSpec flat() { return {LayerKind::flatten}; }
LayerSpec res(std::size_t in, std::size_t out, std::size_t stride) {
  return {LayerKind::res_unit, in, out, 3, stride, 1, true};
}

}  // namespace

ModelSpec make_model_spec(std::string_view name, const Shape& input_chw, std::size_t classes) {
  if (input_chw.size() != 3) throw ShapeError("model input must be C x H x W");
  const std::size_t c = input_chw[0];
  const std::size_t h = input_chw[1];
  const std::size_t w = input_chw[2];
  ModelSpec spec{std::string(name), {}, input_chw, classes};
  auto& L = spec.layers;
  if (name == "mlp") {
    const std::size_t hidden = 64;
    L = {flat(),       linear(c * h * w, hidden, false), bn(hidden), act(),
         linear(hidden, hidden, true), bn(hidden), act(),
         linear(hidden, hidden, true), bn(hidden), act(),
         linear(hidden, classes, false)};
  } else if (name == "cnn4") {
    L = {conv(c, 32, 3, 1, 1, false), pool(2), bn(32), act(),
         conv(32, 64, 3, 1, 1, true), pool(2), bn(64), act(),
         flat(), linear(64 * (h / 4) * (w / 4), 256, true), bn(256), act(),
         linear(256, classes, false)};
  } else if (name == "vgg_small") {
    L = {conv(c, 128, 3, 1, 1, false), bn(128), act(),
         conv(128, 128, 3, 1, 1, true), pool(2), bn(128), act(),
         conv(128, 256, 3, 1, 1, true), bn(256), act(),
         conv(256, 256, 3, 1, 1, true), pool(2), bn(256), act(),
         conv(256, 512, 3, 1, 1, true), bn(512), act(),
         conv(512, 512, 3, 1, 1, true), pool(2), bn(512), act(),
         flat(), linear(512 * (h / 8) * (w / 8), classes, false)};
  } else if (name == "resnet20") {
    L = {conv(c, 16, 3, 1, 1, false), bn(16), act()};
    std::size_t in = 16;
    for (std::size_t stage = 0; stage < 3; ++stage) {
      const std::size_t width = 16u << stage;
      for (std::size_t block = 0; block < 3; ++block) {
        const std::size_t stride = (stage > 0 && block == 0) ? 2 : 1;
        L.push_back(res(in, width, stride));
        L.push_back(res(width, width, 1));
        in = width;
      }
    }
    L.push_back({LayerKind::avg_pool});
    L.push_back(linear(64, classes, false));
  } else {
    throw ConfigError("unknown model '" + std::string(name) +
                      "' (expected mlp, cnn4, vgg_small or resnet20)");
  }
  spec.validate();
  return spec;
}

Model::Model(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  std::mt19937_64 rng(seed);
  for (const LayerSpec& l : spec_.layers) {
    switch (l.kind) {
      case LayerKind::conv: {
        const auto geom = Conv2dGeometry::square(l.stride, l.padding);
        if (l.binarize) {
          modules_.push_back(std::make_unique<BinaryConv2d>(l.in, l.out, l.kernel, geom, rng));
        } else {
          modules_.push_back(std::make_unique<Conv2d>(l.in, l.out, l.kernel, geom, rng));
        }
        break;
      }
      case LayerKind::linear:
        if (l.binarize) {
          modules_.push_back(std::make_unique<BinaryLinear>(l.in, l.out, rng));
        } else {
          modules_.push_back(std::make_unique<Linear>(l.in, l.out, rng));
        }
        break;
      case LayerKind::batch_norm: modules_.push_back(std::make_unique<BatchNorm>(l.out)); break;
      case LayerKind::hardtanh: modules_.push_back(std::make_unique<Hardtanh>()); break;
      case LayerKind::max_pool:
        modules_.push_back(std::make_unique<MaxPool>(l.kernel, l.stride));
        break;
      case LayerKind::avg_pool: modules_.push_back(std::make_unique<GlobalAvgPool>()); break;
      case LayerKind::flatten: modules_.push_back(std::make_unique<Flatten>()); break;
      case LayerKind::res_unit:
        modules_.push_back(std::make_unique<ResidualUnit>(l.in, l.out, l.stride, l.binarize, rng));
        break;
    }
  }
}

Var Model::forward(const Var& x, bool training) {
  const Shape& s = x.shape();
  if (s.size() != 4 || Shape(s.begin() + 1, s.end()) != spec_.input) {
    throw ShapeError("model '" + spec_.name + "' expects N x " + shape_str(spec_.input) +
                     " input, got " + shape_str(s));
  }
  ForwardContext ctx{training, options_};
  Var h = x;
  for (auto& m : modules_) h = m->forward(h, ctx);
  return h;
}

Tensor Model::logits(const Tensor& x) {
  NoGradGuard guard;
  return forward(Var::constant(x), false).value();
}

std::vector<NamedParameter> Model::parameters() const {
  std::vector<NamedParameter> out;
  for (std::size_t i = 0; i < modules_.size(); ++i) {
    modules_[i]->collect_parameters("layers." + std::to_string(i) + ".", out);
  }
  return out;
}

std::vector<NamedBuffer> Model::buffers() const {
  std::vector<NamedBuffer> out;
  for (std::size_t i = 0; i < modules_.size(); ++i) {
    modules_[i]->collect_buffers("layers." + std::to_string(i) + ".", out);
  }
  return out;
}

std::vector<std::pair<std::string, BinaryLayer*>> Model::binary_layers() const {
  std::vector<std::pair<std::string, BinaryLayer*>> out;
  for (std::size_t i = 0; i < modules_.size(); ++i) {
    modules_[i]->collect_binary_layers("layers." + std::to_string(i) + ".", out);
  }
  return out;
}

}  // namespace binet
