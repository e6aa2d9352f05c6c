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
#include <functional>
#include <random>
#include <vector>

#include "binet/data.hpp"
#include "binet/dte.hpp"
#include "binet/metrics.hpp"
#include "binet/model.hpp"
#include "binet/optim.hpp"

namespace binet {

struct TrainConfig {
  int epochs = 400;
  double lr0 = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  dte::ScheduleConfig schedule{};
  double delta = dte::kDefaultDelta;
  WeightBinarizer binarizer = WeightBinarizer::imb;
  bool binarize_activations = true;
  bool augment = false;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Fraction of positions whose sign differs. Throws ShapeError on mismatch.
double sign_flip_rate(const Tensor& prev_signs, const Tensor& curr_signs);

struct EvalResult {
  double accuracy = 0.0;
  double loss = 0.0;
};

/// Eval mode (running batch-norm statistics, weights binarized from the
/// current latent values), no tape.
EvalResult evaluate(Model& model, const data::DatasetSplit& split, std::size_t batch_size = 256);

/// Throws ShapeError unless the split's samples and classes fit the model.
void check_compatible(const Model& model, const data::DatasetSplit& split);

/// Drives one training run: per epoch, refresh each binarized layer's
/// estimator from its current weights, run shuffled minibatches (forward,
/// cross-entropy, backward, SGD step at the cosine-scheduled rate), then
/// record diagnostics.
class Trainer {
 public:
  Trainer(Model& model, TrainConfig cfg);

  MetricsRecord run_epoch(const data::DatasetSplit& train, const data::DatasetSplit* test);

  int epoch() const noexcept { return epoch_; }
  void set_epoch(int epoch) noexcept { epoch_ = epoch; }
  Sgd& optimizer() noexcept { return optimizer_; }
  const TrainConfig& config() const noexcept { return cfg_; }

  /// Recomputes the estimator state of every binarized layer for epoch().
  void refresh_estimators();

 private:
  Model& model_;
  TrainConfig cfg_;
  Sgd optimizer_;
  int epoch_ = 0;
};

using EpochCallback = std::function<void(const MetricsRecord&)>;

std::vector<MetricsRecord> train(Model& model, const data::DatasetSplit& train_split,
                                 const data::DatasetSplit* test_split, const TrainConfig& cfg,
                                 const EpochCallback& on_epoch = {});

}  // namespace binet
