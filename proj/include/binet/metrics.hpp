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

#include <string>
#include <vector>

namespace binet {

/// Per-binarized-layer diagnostics for one epoch.
struct LayerMetrics {
  std::string name;
  double entropy = 0.0;           ///< weight-sign entropy, nats
  double p_plus = 0.0;            ///< fraction of +1 weight signs
  double act_entropy = 0.0;       ///< input-activation sign entropy over the epoch, nats
  double t = 1.0;
  double k = 1.0;
  double t_eps = 0.0;
  double t_100 = 0.0;
  double updatable_fraction = 0.0;  ///< threshold delta from the run config
  double active_fraction = 0.0;     ///< share inside the active region |x| <= 1/t
  double sign_flip_rate = 0.0;      ///< vs. the signs at the start of the epoch
  double error_l1 = 0.0;
  double error_l2 = 0.0;
  int shift = 0;
};

struct MetricsRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  std::vector<LayerMetrics> layers;
};

/// Header line (no trailing newline) for a run whose binarized layers are
/// `layer_names`. Global columns come first, then one block per layer:
///   L<j>_entropy, L<j>_p_plus, L<j>_act_entropy, L<j>_t, L<j>_k, L<j>_t_eps,
///   L<j>_t_100, L<j>_updatable, L<j>_active, L<j>_flip, L<j>_err_l1,
///   L<j>_err_l2, L<j>_shift
std::string metrics_csv_header(std::size_t layer_count);
std::string metrics_csv_row(const MetricsRecord& r);
/// One JSON object, single line.
std::string metrics_json(const MetricsRecord& r);

}  // namespace binet
