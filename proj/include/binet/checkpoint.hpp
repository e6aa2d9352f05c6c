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
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "binet/binio.hpp"
#include "binet/dte.hpp"
#include "binet/model.hpp"
#include "binet/optim.hpp"

namespace binet {

inline constexpr std::uint16_t kCheckpointVersion = 1;

void write_model_spec(binio::Writer& w, const ModelSpec& spec);
ModelSpec read_model_spec(binio::Reader& r);

void write_estimator(binio::Writer& w, const dte::EstimatorState& s);
dte::EstimatorState read_estimator(binio::Reader& r);

/// Everything needed to resume or evaluate a run: topology, latent weights,
/// batch-norm buffers, SGD velocities, per-layer estimator states and the
/// number of completed epochs.
struct Checkpoint {
  ModelSpec spec;
  BinarizeOptions options;
  std::vector<std::pair<std::string, Tensor>> parameters;
  std::vector<std::pair<std::string, Tensor>> buffers;
  std::vector<Tensor> velocities;
  std::vector<std::pair<std::string, dte::EstimatorState>> estimators;
  int epoch = 0;
  std::uint64_t seed = 0;
  std::string config_text;
};

Checkpoint capture_checkpoint(const Model& model, const Sgd* optimizer, int epoch,
                              std::uint64_t seed, std::string config_text);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// Throws the binio container errors, or FormatError on malformed records.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rebuilds the model and copies every tensor in by name. Throws
/// FormatError when names or shapes disagree with the stored spec.
Model restore_model(const Checkpoint& ckpt);
void restore_optimizer(const Checkpoint& ckpt, Sgd& optimizer);

}  // namespace binet
