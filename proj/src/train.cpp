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

#include "binet/train.hpp"

#include <algorithm>
#include <numeric>

#include "binet/error.hpp"
#include "binet/ops.hpp"

namespace binet {
namespace {

std::vector<Var> parameter_vars(const Model& model) {
  std::vector<Var> vars;
  for (auto& p : model.parameters()) vars.push_back(p.var);
  return vars;
}

std::size_t count_correct(const Tensor& logits, std::span<const int> labels) {
  const std::size_t c = logits.dim(1);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const float* row = logits.ptr() + i * c;
    const auto best = static_cast<int>(std::max_element(row, row + c) - row);
    correct += best == labels[i] ? 1 : 0;
  }
  return correct;
}

}  // namespace

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(epochs > 0, "epochs must be positive");
  require(lr0 >= 0.0, "lr must be non-negative");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
  require(weight_decay >= 0.0, "weight_decay must be non-negative");
  require(batch_size > 0, "batch_size must be positive");
  require(schedule.epsilon > 0.0 && schedule.epsilon <= 1.0, "epsilon must lie in (0, 1]");
  require(schedule.t_min > 0.0, "t_min must be positive");
  require(schedule.t_max > schedule.t_min, "t_max must exceed t_min");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
}

double sign_flip_rate(const Tensor& prev_signs, const Tensor& curr_signs) {
  require_same_shape(prev_signs, curr_signs, "sign_flip_rate");
  if (prev_signs.empty()) return 0.0;
  std::size_t flips = 0;
  for (std::size_t i = 0; i < prev_signs.numel(); ++i) {
    flips += (prev_signs[i] >= 0.0f) != (curr_signs[i] >= 0.0f) ? 1 : 0;
  }
  return static_cast<double>(flips) / static_cast<double>(prev_signs.numel());
}

void check_compatible(const Model& model, const data::DatasetSplit& split) {
  if (split.sample_shape() != model.spec().input) {
    throw ShapeError("dataset samples are " + shape_str(split.sample_shape()) + " but model '" +
                     model.spec().name + "' expects " + shape_str(model.spec().input));
  }
  if (split.classes != model.spec().classes) {
    throw ShapeError("dataset has " + std::to_string(split.classes) + " classes, model '" +
                     model.spec().name + "' has " + std::to_string(model.spec().classes));
  }
}

EvalResult evaluate(Model& model, const data::DatasetSplit& split, std::size_t batch_size) {
  check_compatible(model, split);
  NoGradGuard guard;
  EvalResult r;
  if (split.size() == 0) return r;
  std::vector<std::size_t> idx(split.size());
  std::iota(idx.begin(), idx.end(), 0);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t end = std::min(idx.size(), start + batch_size);
    std::span<const std::size_t> sel(idx.data() + start, end - start);
    const Tensor x = data::gather_images(split, sel, false, nullptr);
    const std::vector<int> y = data::gather_labels(split, sel);
    const Var logits = model.forward(Var::constant(x), false);
    loss += cross_entropy(logits, y).value()[0] * static_cast<double>(sel.size());
    correct += count_correct(logits.value(), y);
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(split.size());
  r.loss = loss / static_cast<double>(split.size());
  return r;
}

Trainer::Trainer(Model& model, TrainConfig cfg)
    : model_(model),
      cfg_(cfg),
      optimizer_(parameter_vars(model), cfg.momentum, cfg.weight_decay) {
  cfg_.validate();
  model_.binarize_options().binarizer = cfg_.binarizer;
  model_.binarize_options().binarize_activations = cfg_.binarize_activations;
}

void Trainer::refresh_estimators() {
  for (auto& [name, layer] : model_.binary_layers()) {
    const Tensor w_hat = layer->pre_sign(cfg_.binarizer);
    layer->set_estimator(dte::state_for_epoch(cfg_.schedule, epoch_, cfg_.epochs, w_hat));
  }
}

MetricsRecord Trainer::run_epoch(const data::DatasetSplit& train, const data::DatasetSplit* test) {
  check_compatible(model_, train);
  if (test) check_compatible(model_, *test);

  refresh_estimators();
  const auto layers = model_.binary_layers();
  std::vector<Tensor> start_pre_sign;
  std::vector<Tensor> start_signs;
  for (auto& [name, layer] : layers) {
    start_pre_sign.push_back(layer->pre_sign(cfg_.binarizer));
    start_signs.push_back(layer->quantize(cfg_.binarizer).signs);
    layer->counters() = {};
  }

  MetricsRecord rec;
  rec.epoch = epoch_;
  rec.lr = cosine_lr(epoch_, cfg_.epochs, cfg_.lr0);

  // Epoch-keyed stream so a resumed run shuffles identically.
  std::mt19937_64 rng(cfg_.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(epoch_));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
    const std::size_t end = std::min(order.size(), start + cfg_.batch_size);
    // A trailing batch of one sample cannot be batch-normalized.
    if (end - start < 2) break;
    std::span<const std::size_t> sel(order.data() + start, end - start);
    const Tensor x = data::gather_images(train, sel, cfg_.augment, &rng);
    const std::vector<int> y = data::gather_labels(train, sel);

    optimizer_.zero_grad();
    const Var logits = model_.forward(Var::constant(x), true);
    const Var loss = cross_entropy(logits, y);
    backward(loss);
    optimizer_.step(rec.lr);

    loss_sum += loss.value()[0] * static_cast<double>(sel.size());
    correct += count_correct(logits.value(), y);
  }
  const auto seen = static_cast<double>(std::max<std::size_t>(1, order.size()));
  rec.train_loss = loss_sum / seen;
  rec.train_accuracy = static_cast<double>(correct) / seen;

  for (std::size_t j = 0; j < layers.size(); ++j) {
    BinaryLayer& layer = *layers[j].second;
    const dte::EstimatorState& st = layer.estimator();
    const Tensor w_hat = layer.pre_sign(cfg_.binarizer);
    const imb::QuantizedWeights q = layer.quantize(cfg_.binarizer);
    const imb::QuantizationError err = imb::quantization_error(w_hat, q.dequantized());

    LayerMetrics m;
    m.name = layers[j].first;
    m.p_plus = imb::plus_fraction(q.signs);
    m.entropy = imb::binary_entropy_from_p(m.p_plus);
    const auto& cnt = layer.counters();
    m.act_entropy = cnt.act_total
                        ? imb::binary_entropy_from_p(static_cast<double>(cnt.act_plus) /
                                                     static_cast<double>(cnt.act_total))
                        : 0.0;
    m.t = st.t;
    m.k = st.k;
    m.t_eps = st.bounds.t_eps;
    m.t_100 = st.bounds.t_100;
    m.updatable_fraction = dte::updatable_fraction(start_pre_sign[j], st, cfg_.delta);
    m.active_fraction = dte::updatable_fraction(start_pre_sign[j], st, dte::kActiveRegionDelta);
    m.sign_flip_rate = sign_flip_rate(start_signs[j], q.signs);
    m.error_l1 = err.l1;
    m.error_l2 = err.l2;
    m.shift = q.shift;
    rec.layers.push_back(std::move(m));
  }

  if (test) {
    const EvalResult ev = evaluate(model_, *test);
    rec.test_accuracy = ev.accuracy;
    rec.test_loss = ev.loss;
  }
  ++epoch_;
  return rec;
}

std::vector<MetricsRecord> train(Model& model, const data::DatasetSplit& train_split,
                                 const data::DatasetSplit* test_split, const TrainConfig& cfg,
                                 const EpochCallback& on_epoch) {
  check_compatible(model, train_split);
  if (test_split) check_compatible(model, *test_split);
  Trainer trainer(model, cfg);
  std::vector<MetricsRecord> history;
  while (trainer.epoch() < cfg.epochs) {
    history.push_back(trainer.run_epoch(train_split, test_split));
    if (on_epoch) on_epoch(history.back());
  }
  return history;
}

}  // namespace binet
