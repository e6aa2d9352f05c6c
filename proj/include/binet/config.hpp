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
#include <string_view>

#include "binet/train.hpp"

namespace binet {

/// Everything one `binet train` run needs. Text form is flat key=value
/// lines (# starts a comment); a JSON object with the same keys is accepted
/// too.
struct RunConfig {
  std::string model = "cnn4";
  std::string dataset = "mnist";
  std::string data_dir = "data/mnist";
  int epochs = 30;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  dte::EstimatorMode estimator = dte::EstimatorMode::dte;
  dte::ClampMode clamp_mode = dte::ClampMode::literal;
  double epsilon = dte::kDefaultEpsilon;
  double t_min = dte::kDefaultTMin;
  double t_max = dte::kDefaultTMax;
  double delta = dte::kDefaultDelta;
  WeightBinarizer binarizer = WeightBinarizer::imb;
  bool binarize_activations = true;
  bool augment = false;
  int checkpoint_every = 10;
  std::string out = "runs/latest";

  /// Throws ConfigError on any out-of-range field.
  void validate() const;
  TrainConfig train_config() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Sets one field from its text form. Throws ConfigError on an unknown key
/// or an unparsable value.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses key=value text or a JSON object, starting from the defaults.
RunConfig parse_run_config(std::string_view text);
/// Applies `text` on top of an existing config.
void merge_run_config(RunConfig& cfg, std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Every key in a fixed order; parse_run_config(serialize(c)) == c.
std::string serialize_run_config(const RunConfig& cfg);

}  // namespace binet
