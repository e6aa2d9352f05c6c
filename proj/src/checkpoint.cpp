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

#include "binet/checkpoint.hpp"

#include "binet/data.hpp"
#include "binet/error.hpp"

namespace binet {
namespace {

constexpr std::array<char, 4> kMagic = {'B', 'N', 'C', 'K'};

enum Tag : std::uint16_t {
  kSpec = 1,
  kOptions = 2,
  kParam = 3,
  kBuffer = 4,
  kVelocity = 5,
  kEstimator = 6,
  kProgress = 7,
  kConfig = 8,
};

binio::Record record(std::uint16_t tag, binio::Writer& w) { return {tag, w.take()}; }

void copy_named(const std::vector<std::pair<std::string, Tensor>>& stored,
                const std::vector<std::string>& names, const std::vector<Tensor*>& dst,
                const char* what) {
  if (stored.size() != dst.size()) {
    throw FormatError(std::string("checkpoint holds ") + std::to_string(stored.size()) + " " + what +
                      ", model has " + std::to_string(dst.size()));
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (stored[i].first != names[i]) {
      throw FormatError(std::string(what) + " " + std::to_string(i) + " is '" + stored[i].first +
                        "', expected '" + names[i] + "'");
    }
    if (stored[i].second.shape() != dst[i]->shape()) {
      throw FormatError(names[i] + ": stored shape " + shape_str(stored[i].second.shape()) +
                        " != " + shape_str(dst[i]->shape()));
    }
    *dst[i] = stored[i].second;
  }
}

}  // namespace

void write_model_spec(binio::Writer& w, const ModelSpec& spec) {
  w.str(spec.name);
  w.u32(static_cast<std::uint32_t>(spec.input.size()));
  for (std::size_t d : spec.input) w.u64(d);
  w.u64(spec.classes);
  w.u32(static_cast<std::uint32_t>(spec.layers.size()));
  for (const LayerSpec& l : spec.layers) {
    w.str(to_string(l.kind));
    w.u64(l.in);
    w.u64(l.out);
    w.u64(l.kernel);
    w.u64(l.stride);
    w.u64(l.padding);
    w.u8(l.binarize ? 1 : 0);
  }
}

ModelSpec read_model_spec(binio::Reader& r) {
  ModelSpec spec;
  spec.name = r.str();
  const std::uint32_t rank = r.u32();
  if (rank > 8) throw FormatError("model input rank out of range");
  spec.input.resize(rank);
  for (auto& d : spec.input) d = r.u64();
  spec.classes = r.u64();
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    LayerSpec l;
    l.kind = parse_layer_kind(r.str());
    l.in = r.u64();
    l.out = r.u64();
    l.kernel = r.u64();
    l.stride = r.u64();
    l.padding = r.u64();
    l.binarize = r.u8() != 0;
    spec.layers.push_back(l);
  }
  return spec;
}

void write_estimator(binio::Writer& w, const dte::EstimatorState& s) {
  w.str(dte::to_string(s.mode));
  w.f64(s.t);
  w.f64(s.k);
  w.i32(s.epoch);
  w.i32(s.total);
  w.f64(s.epsilon);
  w.f64(s.t_min);
  w.f64(s.t_max);
  w.str(dte::to_string(s.bounds.mode));
  w.f64(s.bounds.t_eps);
  w.f64(s.bounds.t_100);
}

dte::EstimatorState read_estimator(binio::Reader& r) {
  dte::EstimatorState s;
  s.mode = dte::parse_estimator_mode(r.str());
  s.t = r.f64();
  s.k = r.f64();
  s.epoch = r.i32();
  s.total = r.i32();
  s.epsilon = r.f64();
  s.t_min = r.f64();
  s.t_max = r.f64();
  s.bounds.mode = dte::parse_clamp_mode(r.str());
  s.bounds.t_eps = r.f64();
  s.bounds.t_100 = r.f64();
  return s;
}

Checkpoint capture_checkpoint(const Model& model, const Sgd* optimizer, int epoch,
                              std::uint64_t seed, std::string config_text) {
  Checkpoint c;
  c.spec = model.spec();
  c.options = model.binarize_options();
  for (const auto& p : model.parameters()) c.parameters.emplace_back(p.name, p.var.value());
  for (const auto& b : model.buffers()) c.buffers.emplace_back(b.name, *b.tensor);
  if (optimizer) c.velocities = optimizer->velocities();
  for (const auto& [name, layer] : model.binary_layers()) c.estimators.emplace_back(name, layer->estimator());
  c.epoch = epoch;
  c.seed = seed;
  c.config_text = std::move(config_text);
  return c;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  std::vector<binio::Record> recs;
  binio::Writer w;
  write_model_spec(w, c.spec);
  recs.push_back(record(kSpec, w));
  w.str(to_string(c.options.binarizer));
  w.u8(c.options.binarize_activations ? 1 : 0);
  recs.push_back(record(kOptions, w));
  for (const auto& [name, t] : c.parameters) {
    w.str(name);
    w.tensor(t);
    recs.push_back(record(kParam, w));
  }
  for (const auto& [name, t] : c.buffers) {
    w.str(name);
    w.tensor(t);
    recs.push_back(record(kBuffer, w));
  }
  for (const Tensor& v : c.velocities) {
    w.tensor(v);
    recs.push_back(record(kVelocity, w));
  }
  for (const auto& [name, s] : c.estimators) {
    w.str(name);
    write_estimator(w, s);
    recs.push_back(record(kEstimator, w));
  }
  w.i32(c.epoch);
  w.u64(c.seed);
  recs.push_back(record(kProgress, w));
  w.str(c.config_text);
  recs.push_back(record(kConfig, w));
  return binio::encode_container(kMagic, kCheckpointVersion, recs);
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Checkpoint c;
  bool have_spec = false;
  for (const binio::Record& rec : binio::decode_container(bytes, kMagic, kCheckpointVersion)) {
    binio::Reader r(rec.value);
    switch (rec.tag) {
      case kSpec:
        c.spec = read_model_spec(r);
        have_spec = true;
        break;
      case kOptions:
        c.options.binarizer = parse_weight_binarizer(r.str());
        c.options.binarize_activations = r.u8() != 0;
        break;
      case kParam: {
        std::string name = r.str();
        c.parameters.emplace_back(std::move(name), r.tensor());
        break;
      }
      case kBuffer: {
        std::string name = r.str();
        c.buffers.emplace_back(std::move(name), r.tensor());
        break;
      }
      case kVelocity: c.velocities.push_back(r.tensor()); break;
      case kEstimator: {
        std::string name = r.str();
        c.estimators.emplace_back(std::move(name), read_estimator(r));
        break;
      }
      case kProgress:
        c.epoch = r.i32();
        c.seed = r.u64();
        break;
      case kConfig: c.config_text = r.str(); break;
      default: throw FormatError("unknown checkpoint record tag " + std::to_string(rec.tag));
    }
    if (!r.done()) throw FormatError("checkpoint record " + std::to_string(rec.tag) + " has trailing bytes");
  }
  if (!have_spec) throw FormatError("checkpoint has no model spec");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  binio::write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = data::read_file(path);
  return decode_checkpoint(bytes);
}

Model restore_model(const Checkpoint& ckpt) {
  Model model(ckpt.spec, ckpt.seed);
  model.binarize_options().binarizer = ckpt.options.binarizer;
  model.binarize_options().binarize_activations = ckpt.options.binarize_activations;

  std::vector<std::string> names;
  std::vector<Tensor*> dst;
  for (auto& p : model.parameters()) {
    names.push_back(p.name);
    Var v = p.var;
    dst.push_back(&v.mutable_value());
  }
  copy_named(ckpt.parameters, names, dst, "parameters");

  names.clear();
  dst.clear();
  for (auto& b : model.buffers()) {
    names.push_back(b.name);
    dst.push_back(b.tensor);
  }
  copy_named(ckpt.buffers, names, dst, "buffers");

  const auto layers = model.binary_layers();
  if (!ckpt.estimators.empty()) {
    if (ckpt.estimators.size() != layers.size()) throw FormatError("estimator count mismatch");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (ckpt.estimators[i].first != layers[i].first) {
        throw FormatError("estimator for '" + ckpt.estimators[i].first + "' does not match '" +
                          layers[i].first + "'");
      }
      layers[i].second->set_estimator(ckpt.estimators[i].second);
    }
  }
  return model;
}

void restore_optimizer(const Checkpoint& ckpt, Sgd& optimizer) {
  auto& vel = optimizer.velocities();
  if (ckpt.velocities.empty()) return;
  if (ckpt.velocities.size() != vel.size()) throw FormatError("velocity count mismatch");
  for (std::size_t i = 0; i < vel.size(); ++i) {
    if (ckpt.velocities[i].shape() != vel[i].shape()) throw FormatError("velocity shape mismatch");
    vel[i] = ckpt.velocities[i];
  }
}

}  // namespace binet
