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

#include "binet/commands.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "binet/binio.hpp"
#include "binet/checkpoint.hpp"
#include "binet/data.hpp"
#include "binet/error.hpp"
#include "json.hpp"

namespace binet {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> lines;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + '\n';
  return out;
}

bool has_magic(const fs::path& path, const char* magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char buf[4] = {};
  in.read(buf, 4);
  return in.gcount() == 4 && std::equal(buf, buf + 4, magic);
}

}  // namespace

TrainOutcome cmd_train(const RunConfig& cfg, const std::optional<fs::path>& resume, std::ostream* log) {
  cfg.validate();
  const fs::path out = cfg.out;
  const data::Dataset ds = data::load_dataset(cfg.dataset, cfg.data_dir, cfg.seed);
  const std::string config_text = serialize_run_config(cfg);

  Model model = [&] {
    if (resume) return restore_model(load_checkpoint(*resume));
    return Model(make_model_spec(cfg.model, ds.train.sample_shape(), ds.train.classes), cfg.seed);
  }();
  check_compatible(model, ds.train);
  check_compatible(model, ds.test);

  Trainer trainer(model, cfg.train_config());
  std::vector<std::string> csv{metrics_csv_header(model.binary_layers().size())};
  std::vector<std::string> jsonl;
  if (resume) {
    const Checkpoint ck = load_checkpoint(*resume);
    restore_optimizer(ck, trainer.optimizer());
    trainer.set_epoch(ck.epoch);
    auto old_csv = read_lines(out / "metrics.csv");
    auto old_json = read_lines(out / "metrics.jsonl");
    const auto keep = static_cast<std::size_t>(ck.epoch);
    if (old_csv.size() >= keep + 1) csv.assign(old_csv.begin(), old_csv.begin() + 1 + static_cast<std::ptrdiff_t>(keep));
    if (old_json.size() >= keep) jsonl.assign(old_json.begin(), old_json.begin() + static_cast<std::ptrdiff_t>(keep));
  }

  binio::write_text_atomic(out / "config.snapshot", config_text);
  TrainOutcome result;
  while (trainer.epoch() < cfg.epochs) {
    MetricsRecord rec = trainer.run_epoch(ds.train, &ds.test);
    csv.push_back(metrics_csv_row(rec));
    jsonl.push_back(metrics_json(rec));
    binio::write_text_atomic(out / "metrics.csv", join_lines(csv));
    binio::write_text_atomic(out / "metrics.jsonl", join_lines(jsonl));
    const int done = trainer.epoch();
    if (done % cfg.checkpoint_every == 0 || done == cfg.epochs) {
      result.last_checkpoint = out / "checkpoints" / ("epoch_" + std::to_string(done) + ".bin");
      save_checkpoint(result.last_checkpoint,
                      capture_checkpoint(model, &trainer.optimizer(), done, cfg.seed, config_text));
    }
    if (log) {
      char line[200];
      std::snprintf(line, sizeof line,
                    "epoch %d/%d lr %.5f train_loss %.4f train_acc %.4f test_loss %.4f test_acc %.4f",
                    rec.epoch + 1, cfg.epochs, rec.lr, rec.train_loss, rec.train_accuracy,
                    rec.test_loss, rec.test_accuracy);
      *log << line << std::endl;
    }
    result.history.push_back(std::move(rec));
  }

  binio::write_text_atomic(out / "report" / "layers.csv", inspect_csv(inspect_model(model, cfg.delta)));
  nlohmann::ordered_json summary;
  summary["model"] = cfg.model;
  summary["dataset"] = cfg.dataset;
  summary["epochs"] = cfg.epochs;
  if (!result.history.empty()) {
    summary["final_train_accuracy"] = result.history.back().train_accuracy;
    summary["final_test_accuracy"] = result.history.back().test_accuracy;
  }
  summary["checkpoint"] = result.last_checkpoint.string();
  binio::write_text_atomic(out / "report" / "summary.json", summary.dump(2) + "\n");
  return result;
}

EvalResult evaluate_packed(const packed::PackedModel& m, const data::DatasetSplit& split,
                           std::size_t batch_size) {
  if (split.sample_shape() != m.input_shape() || split.classes != m.classes()) {
    throw ShapeError("dataset " + shape_str(split.sample_shape()) + " with " +
                     std::to_string(split.classes) + " classes does not fit packed model '" +
                     m.name() + "'");
  }
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
    const Tensor logits = m.run(data::gather_images(split, sel, false, nullptr));
    const std::vector<int> y = data::gather_labels(split, sel);
    loss += cross_entropy(Var::constant(logits), y).value()[0] * static_cast<double>(sel.size());
    const std::size_t c = logits.dim(1);
    for (std::size_t i = 0; i < sel.size(); ++i) {
      const float* row = logits.ptr() + i * c;
      correct += static_cast<int>(std::max_element(row, row + c) - row) == y[i] ? 1 : 0;
    }
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(split.size());
  r.loss = loss / static_cast<double>(split.size());
  return r;
}

EvalResult cmd_eval(const EvalTarget& t) {
  RunConfig cfg;
  std::optional<Model> model;
  std::optional<packed::PackedModel> pm;
  if (has_magic(t.model, "BNET")) {
    pm = packed::load_packed(t.model);
  } else {
    const Checkpoint ck = load_checkpoint(t.model);
    if (!ck.config_text.empty()) cfg = parse_run_config(ck.config_text);
    model.emplace(restore_model(ck));
  }
  if (t.dataset) cfg.dataset = *t.dataset;
  if (t.data_dir) cfg.data_dir = *t.data_dir;
  if (t.seed) cfg.seed = *t.seed;
  const data::Dataset ds = data::load_dataset(cfg.dataset, cfg.data_dir, cfg.seed);
  if (pm) return evaluate_packed(*pm, ds.test);
  return evaluate(*model, ds.test);
}

std::vector<InspectRow> inspect_model(const Model& model, double delta) {
  std::vector<InspectRow> rows;
  const WeightBinarizer b = model.binarize_options().binarizer;
  for (const auto& [name, layer] : model.binary_layers()) {
    const imb::QuantizedWeights q = layer->quantize(b);
    const dte::EstimatorState& st = layer->estimator();
    const Tensor w_hat = layer->pre_sign(b);
    InspectRow r;
    r.layer = name;
    r.p_plus = imb::plus_fraction(q.signs);
    r.entropy = imb::binary_entropy_from_p(r.p_plus);
    r.t = st.t;
    r.k = st.k;
    r.t_eps = st.bounds.t_eps;
    r.t_100 = st.bounds.t_100;
    r.updatable_fraction = dte::updatable_fraction(w_hat, st, delta);
    r.active_fraction = dte::updatable_fraction(w_hat, st, dte::kActiveRegionDelta);
    r.shift = q.shift;
    rows.push_back(r);
  }
  return rows;
}

std::vector<InspectRow> cmd_inspect(const fs::path& checkpoint, std::optional<double> delta) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  double d = dte::kDefaultDelta;
  if (!ck.config_text.empty()) d = parse_run_config(ck.config_text).delta;
  if (delta) d = *delta;
  return inspect_model(restore_model(ck), d);
}

std::string inspect_csv(const std::vector<InspectRow>& rows) {
  std::string out = "layer,entropy,p_plus,t,k,t_eps,t_100,updatable_fraction,active_fraction,shift\n";
  char buf[400];
  for (const InspectRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d\n", r.layer.c_str(),
                  r.entropy, r.p_plus, r.t, r.k, r.t_eps, r.t_100, r.updatable_fraction,
                  r.active_fraction, r.shift);
    out += buf;
  }
  return out;
}

ExportReport cmd_export(const fs::path& checkpoint, const fs::path& out) {
  const Model model = restore_model(load_checkpoint(checkpoint));
  const packed::PackedModel pm = packed::export_model(model);
  packed::save_packed(out, pm);
  ExportReport r;
  r.file_bytes = fs::file_size(out);
  r.checkpoint_bytes = fs::file_size(checkpoint);
  r.size = pm.size_report();
  r.ops = pm.count_ops();
  return r;
}

std::string export_json(const ExportReport& r) {
  nlohmann::ordered_json j;
  j["file_bytes"] = r.file_bytes;
  j["checkpoint_bytes"] = r.checkpoint_bytes;
  j["size_ratio"] = r.checkpoint_bytes ? static_cast<double>(r.file_bytes) / static_cast<double>(r.checkpoint_bytes) : 0.0;
  j["binary_weights"] = r.size.binary_weights;
  j["float_weights"] = r.size.float_weights;
  j["bn_parameters"] = r.size.bn_parameters;
  j["size_megabits"] = r.size.megabits();
  j["float_ops"] = r.ops.float_ops;
  j["bitwise_ops"] = r.ops.bitwise_ops;
  return j.dump();
}

std::vector<BenchResult> cmd_bench(const std::vector<BenchGeometry>& geometries, int repetitions,
                                   std::uint64_t seed, const std::optional<fs::path>& out) {
  std::vector<BenchResult> results;
  std::string text = "[";
  for (std::size_t i = 0; i < geometries.size(); ++i) {
    results.push_back(benchmark_conv(geometries[i], repetitions, seed));
    text += (i ? "," : "") + bench_json(results.back());
  }
  text += "]\n";
  if (out) binio::write_text_atomic(*out, text);
  return results;
}

}  // namespace binet
