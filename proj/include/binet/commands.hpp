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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "binet/bench.hpp"
#include "binet/config.hpp"
#include "binet/metrics.hpp"
#include "binet/packed.hpp"
#include "binet/train.hpp"

namespace binet {

/// Output directory layout written by cmd_train:
///   config.snapshot, metrics.csv, metrics.jsonl,
///   checkpoints/epoch_<k>.bin (k = completed epochs), report/layers.csv,
///   report/summary.json
struct TrainOutcome {
  std::vector<MetricsRecord> history;
  std::filesystem::path last_checkpoint;
};

/// Runs a full training job. With `resume`, continues from that
/// checkpoint's epoch and keeps the earlier metric rows. Progress lines go
/// to `log` when given.
TrainOutcome cmd_train(const RunConfig& cfg, const std::optional<std::filesystem::path>& resume = {},
                       std::ostream* log = nullptr);

struct EvalTarget {
  std::filesystem::path model;  ///< checkpoint or packed model file
  std::optional<std::string> dataset;
  std::optional<std::string> data_dir;
  std::optional<std::uint64_t> seed;
};

/// Accepts either file type (told apart by magic number). Dataset settings
/// default to the ones recorded in the checkpoint, or mnist for packed files.
EvalResult cmd_eval(const EvalTarget& target);
EvalResult evaluate_packed(const packed::PackedModel& m, const data::DatasetSplit& split,
                           std::size_t batch_size = 256);

struct InspectRow {
  std::string layer;
  double entropy = 0.0;
  double p_plus = 0.0;
  double t = 0.0;
  double k = 0.0;
  double t_eps = 0.0;
  double t_100 = 0.0;
  double updatable_fraction = 0.0;
  double active_fraction = 0.0;
  int shift = 0;
};

std::vector<InspectRow> inspect_model(const Model& model, double delta);
std::vector<InspectRow> cmd_inspect(const std::filesystem::path& checkpoint,
                                    std::optional<double> delta = {});
/// layer,entropy,p_plus,t,k,t_eps,t_100,updatable_fraction,active_fraction,shift
std::string inspect_csv(const std::vector<InspectRow>& rows);

struct ExportReport {
  std::uint64_t file_bytes = 0;
  std::uint64_t checkpoint_bytes = 0;
  packed::SizeReport size;
  packed::OpCounts ops;
};

ExportReport cmd_export(const std::filesystem::path& checkpoint, const std::filesystem::path& out);
std::string export_json(const ExportReport& r);

std::vector<BenchResult> cmd_bench(const std::vector<BenchGeometry>& geometries, int repetitions,
                                   std::uint64_t seed,
                                   const std::optional<std::filesystem::path>& out = {});

}  // namespace binet
