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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Long training criteria read MNIST from
// --mnist-dir; run a subset with --only 1,4,9.

#include <malloc.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "binet/bench.hpp"
#include "binet/binio.hpp"
#include "binet/checkpoint.hpp"
#include "binet/data.hpp"
#include "binet/dte.hpp"
#include "binet/imb.hpp"
#include "binet/metrics.hpp"
#include "binet/packed.hpp"
#include "binet/train.hpp"
#include "oracles.hpp"
#include "surrogate_net.hpp"

namespace {

using namespace binet;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

struct Options {
  fs::path mnist_dir = "data/mnist";
  fs::path report;
  fs::path work_dir;
  bool verbose = false;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Tensor random_signs(Shape shape, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = (rng() & 1) ? 1.0f : -1.0f;
  return t;
}

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Outcome kernel_exactness() {
  std::mt19937_64 rng(1001);
  int exact = 0;
  double worst = 0.0;
  constexpr int kCases = 1000;
  for (int trial = 0; trial < kCases; ++trial) {
    const std::size_t k = pick(rng, 1, 5), stride = pick(rng, 1, 3), pad = pick(rng, 0, k / 2 + 1);
    const std::size_t c = pick(rng, 1, 200), o = pick(rng, 1, 12);
    const std::size_t h = pick(rng, k, 10), w = pick(rng, k, 10);
    const int s = static_cast<int>(pick(rng, 0, 20)) - 10;
    const auto geom = Conv2dGeometry::square(stride, pad);
    const Tensor x = random_signs({pick(rng, 1, 2), c, h, w}, rng);
    const Tensor signs = random_signs({o, c, k, k}, rng);
    const Tensor got = packed::packed_conv2d(x, packed::make_binary_weights(signs, s, geom, false));
    const auto ref = oracle::conv2d(oracle::DTensor(x), oracle::DTensor(signs),
                                    {stride, stride, pad, pad});
    bool ok = got.shape() == ref.shape;
    for (std::size_t i = 0; ok && i < got.numel(); ++i) {
      const double err = std::fabs(static_cast<double>(got[i]) - std::ldexp(ref[i], s));
      worst = std::max(worst, err);
      ok = err == 0.0;
    }
    exact += ok ? 1 : 0;
  }
  return {exact == kCases, fmt("%d/%d cases exact, max abs error %g", exact, kCases, worst)};
}

Outcome gradient_fidelity() {
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> ts(-1.0, 1.0), us(-4.0, 4.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t = std::pow(10.0, ts(rng));
    dte::EstimatorState st;
    st.t = t;
    st.k = dte::k_for(t);
    const double x = static_cast<float>(us(rng) / t);
    const double h = 1e-5 / t;
    const double fd =
        (st.k * std::tanh(t * (x + h)) - st.k * std::tanh(t * (x - h))) / (2.0 * h);
    worst = std::max(worst, std::fabs(st.derivative(static_cast<float>(x)) - fd) / fd);
  }
  double net = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (double t : {0.5, 1.0, 2.0}) net = std::max(net, oracle::surrogate_net_check(seed, t).worst());
  }
  return {worst <= 1e-4 && net <= 1e-3,
          fmt("derivative max rel err %.2e over 1000 pairs (limit 1e-4); "
              "2-layer surrogate net max rel err %.2e (limit 1e-3)",
              worst, net)};
}

Outcome shift_optimality() {
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<float> loc(-1.0f, 1.0f), sc(0.001f, 3.0f);
  int within = 0, exact = 0;
  constexpr int kLayers = 1000;
  for (int i = 0; i < kLayers; ++i) {
    const std::size_t n = pick(rng, 1, 64) * 9 * pick(rng, 1, 8);
    const Tensor w = Tensor::randn({n}, rng, loc(rng), sc(rng));
    const int s = imb::binarize_weights(w).shift;
    const int best = oracle::brute_force_shift(
        oracle::standardize(std::vector<double>(w.data().begin(), w.data().end())));
    within += std::abs(s - best) <= 1 ? 1 : 0;
    exact += s == best ? 1 : 0;
  }
  return {within == kLayers, fmt("within +-1: %d/%d; exact-match rate %.1f%%", within, kLayers,
                                 100.0 * exact / kLayers)};
}

Outcome entropy_maximization() {
  std::mt19937_64 rng(1004);
  const Tensor w = Tensor::randn({4096}, rng, 0.8f, 1.0f);
  const double vanilla = imb::binary_entropy(imb::binarize_activations(w));
  const double imb_h = imb::binary_entropy(imb::binarize_weights(w).signs);
  const double h5 = imb::binary_entropy_from_p(0.5), h2 = imb::binary_entropy_from_p(0.2);
  const bool ok = vanilla <= 0.55 && imb_h >= 0.686 && std::fabs(h5 - 0.6931) <= 1e-3 &&
                  std::fabs(h2 - 0.5004) <= 1e-3;
  return {ok, fmt("vanilla %.4f nats (<= 0.55), IMB %.4f nats (>= 0.686), "
                  "H(0.5)=%.4f H(0.2)=%.4f",
                  vanilla, imb_h, h5, h2)};
}

Outcome quantization_error_ordering() {
  std::mt19937_64 rng(1005);
  int wins = 0;
  for (int i = 0; i < 100; ++i) {
    // Conv layers at their He-initialization scale.
    const std::size_t in = pick(rng, 16, 256), out = pick(rng, 16, 256), k = pick(rng, 1, 3) * 2 - 1;
    const float stddev = std::sqrt(2.0f / static_cast<float>(in * k * k));
    const Tensor w = Tensor::randn({out, in, k, k}, rng, 0.0f, stddev);
    const double imb_l2 =
        imb::quantization_error(imb::standardize_balance(w), imb::binarize_weights(w).dequantized()).l2;
    const double vanilla_l2 = imb::quantization_error(w, imb::binarize_activations(w)).l2;
    wins += imb_l2 < vanilla_l2 ? 1 : 0;
  }
  Model model(make_model_spec("cnn4", {1, 28, 28}, 10), 1);
  const auto ops = packed::export_model(model).count_ops(packed::ScalingStyle::imb);
  return {wins >= 95 && ops.float_ops == 0,
          fmt("IMB L2 < vanilla L2 on %d/100 layers (>= 95); cnn4 float_ops=%llu bitwise_ops=%llu",
              wins, static_cast<unsigned long long>(ops.float_ops),
              static_cast<unsigned long long>(ops.bitwise_ops))};
}

/// Trains cnn4 on MNIST and keeps the per-epoch records.
struct MnistRun {
  std::vector<MetricsRecord> history;
  std::unique_ptr<Model> model;
};

MnistRun train_mnist(const Options& opt, const data::Dataset& ds, const std::string& tag,
                     int epochs, dte::EstimatorMode estimator, dte::ClampMode clamp,
                     WeightBinarizer binarizer) {
  MnistRun run;
  run.model = std::make_unique<Model>(make_model_spec("cnn4", ds.train.sample_shape(), 10), 0);
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.seed = 0;
  // 8k training digits overfit without small random shifts.
  cfg.augment = true;
  cfg.schedule.mode = estimator;
  cfg.schedule.clamp = clamp;
  cfg.binarizer = binarizer;
  fs::create_directories(opt.work_dir);
  std::ofstream csv(opt.work_dir / (tag + ".csv"));
  csv << metrics_csv_header(2) << '\n';
  run.history = train(*run.model, ds.train, &ds.test, cfg, [&](const MetricsRecord& r) {
    csv << metrics_csv_row(r) << '\n' << std::flush;
    if (opt.verbose) {
      std::fprintf(stderr, "  [%s] epoch %d test_acc %.4f active %.4f/%.4f\n", tag.c_str(),
                   r.epoch, r.test_accuracy, r.layers[0].active_fraction,
                   r.layers[1].active_fraction);
    }
  });
  return run;
}

const data::Dataset* load_mnist_once(const Options& opt, std::string& error) {
  static std::unique_ptr<data::Dataset> cached;
  static std::string cached_error;
  static bool tried = false;
  if (!tried) {
    tried = true;
    try {
      cached = std::make_unique<data::Dataset>(data::load_mnist(opt.mnist_dir));
    } catch (const std::exception& e) {
      cached_error = e.what();
    }
  }
  error = cached_error;
  return cached.get();
}

Outcome updatable_fraction_guarantee(const Options& opt) {
  std::string err;
  const auto* ds = load_mnist_once(opt, err);
  if (!ds) return {false, "MNIST unavailable: " + err};
  constexpr int kEpochs = 50;
  const auto dte_run = train_mnist(opt, *ds, "c6_dte_active_region", kEpochs, dte::EstimatorMode::dte,
                                   dte::ClampMode::active_region, WeightBinarizer::imb);
  const auto ede_run = train_mnist(opt, *ds, "c6_ede", kEpochs, dte::EstimatorMode::ede,
                                   dte::ClampMode::literal, WeightBinarizer::imb);
  double dte_min = 1.0;
  for (const auto& r : dte_run.history)
    for (const auto& l : r.layers) dte_min = std::min(dte_min, l.active_fraction);
  // Final 10% of epochs: every binarized layer must fall under 0.05.
  double ede_max_tail = 0.0;
  const int tail_start = kEpochs - kEpochs / 10;
  for (const auto& r : ede_run.history) {
    if (r.epoch < tail_start) continue;
    for (const auto& l : r.layers) ede_max_tail = std::max(ede_max_tail, l.active_fraction);
  }
  return {dte_min >= 0.10 && ede_max_tail < 0.05,
          fmt("active-region DTE min updatable %.4f over all epochs/layers (>= 0.10); "
              "EDE max updatable in final %d epochs %.4f (< 0.05); test acc DTE %.4f EDE %.4f",
              dte_min, kEpochs / 10, ede_max_tail, dte_run.history.back().test_accuracy,
              ede_run.history.back().test_accuracy)};
}

std::unique_ptr<Model> g_trained_cnn4;

Outcome training_quality(const Options& opt) {
  std::string err;
  const auto* ds = load_mnist_once(opt, err);
  if (!ds) return {false, "MNIST unavailable: " + err};
  constexpr int kEpochs = 30;
  auto ours = train_mnist(opt, *ds, "c7_imb_dte", kEpochs, dte::EstimatorMode::dte,
                          dte::ClampMode::literal, WeightBinarizer::imb);
  const auto base = train_mnist(opt, *ds, "c7_vanilla_identity", kEpochs,
                                dte::EstimatorMode::identity, dte::ClampMode::literal,
                                WeightBinarizer::vanilla);
  const double a = ours.history.back().test_accuracy, b = base.history.back().test_accuracy;
  g_trained_cnn4 = std::move(ours.model);
  return {a >= 0.97 && a - b >= 0.005,
          fmt("IMB+DTE test acc %.4f (>= 0.97); vanilla+identity %.4f; margin %.2f points (>= 0.5)",
              a, b, 100.0 * (a - b))};
}

Outcome kernel_speed(const Options& opt) {
  const BenchResult r = benchmark_conv(BenchGeometry{}, 100, 0);
  fs::create_directories(opt.work_dir);
  binio::write_text_atomic(opt.work_dir / "bench_256x256x3x14x14.json", bench_json(r) + "\n");
  return {r.ratio >= 2.0, fmt("packed %.0f ns, naive float %.0f ns, ratio %.1fx (>= 2), "
                              "median of %d reps, %d thread",
                              r.ns_packed, r.ns_float, r.ratio, r.repetitions, r.thread_count)};
}

Outcome storage_saving() {
  std::unique_ptr<Model> fresh;
  const Model* model = g_trained_cnn4.get();
  if (!model) {
    fresh = std::make_unique<Model>(make_model_spec("cnn4", {1, 28, 28}, 10), 0);
    model = fresh.get();
  }
  // A resumable checkpoint carries the optimizer state, as written by train.
  std::vector<Var> params;
  for (const auto& p : model->parameters()) params.push_back(p.var);
  Sgd sgd(params, 0.9, 1e-4);
  const auto ckpt = encode_checkpoint(capture_checkpoint(*model, &sgd, 0, 0, ""));
  const auto weights_only = encode_checkpoint(capture_checkpoint(*model, nullptr, 0, 0, ""));
  const auto packed_bytes = packed::encode_packed(packed::export_model(*model));
  const double ratio = static_cast<double>(packed_bytes.size()) / static_cast<double>(ckpt.size());
  const double ratio_w =
      static_cast<double>(packed_bytes.size()) / static_cast<double>(weights_only.size());
  return {ratio <= 1.0 / 8.0 && ratio_w <= 1.0 / 8.0,
          fmt("%s cnn4: packed %zu bytes, checkpoint %zu bytes (ratio 1/%.1f), "
              "weights-only checkpoint %zu bytes (ratio 1/%.1f); limit 1/8",
              g_trained_cnn4 ? "trained" : "untrained", packed_bytes.size(), ckpt.size(),
              1.0 / ratio, weights_only.size(), 1.0 / ratio_w)};
}

}  // namespace

int main(int argc, char** argv) {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);

  Options opt;
  std::string only;
  CLI::App app{"binet acceptance suite"};
  app.add_option("--mnist-dir", opt.mnist_dir, "directory with MNIST IDX files");
  app.add_option("--report", opt.report, "also write the result lines to this file");
  app.add_option("--work-dir", opt.work_dir, "where training metrics and bench JSON go");
  app.add_option("--only", only, "comma-separated criterion numbers");
  app.add_flag("-v,--verbose", opt.verbose, "per-epoch progress on stderr");
  CLI11_PARSE(app, argc, argv);
  if (opt.work_dir.empty()) {
    opt.work_dir = opt.report.empty() ? fs::path("acceptance_runs")
                                      : opt.report.parent_path() / "acceptance_runs";
  }

  std::set<int> selected;
  std::stringstream ss(only);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (!tok.empty()) selected.insert(std::stoi(tok));
  }

  const std::vector<Criterion> criteria{
      {1, "kernel exactness", 120, kernel_exactness},
      {2, "gradient fidelity", 120, gradient_fidelity},
      {3, "shift-scalar optimality", 60, shift_optimality},
      {4, "entropy maximization", 10, entropy_maximization},
      {5, "quantization-error ordering", 60, quantization_error_ordering},
      {6, "updatable-fraction guarantee", 2400, [&] { return updatable_fraction_guarantee(opt); }},
      {7, "desk-scale training quality", 2400, [&] { return training_quality(opt); }},
      {8, "kernel speed", 300, [&] { return kernel_speed(opt); }},
      {9, "storage saving", 10, storage_saving},
  };

  std::ofstream report;
  if (!opt.report.empty()) report.open(opt.report);
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs <= c.budget_s;
    const bool pass = o.pass && in_budget;
    failures += pass ? 0 : 1;
    const std::string line =
        fmt("[%s] %d %s: ", pass ? "PASS" : "FAIL", c.id, c.title) + o.detail +
        fmt(" (%.1fs, budget %.0fs%s)", secs, c.budget_s, in_budget ? "" : " EXCEEDED");
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    if (report) report << line << '\n' << std::flush;
  }
  return failures == 0 ? 0 : 1;
}
