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

#include <malloc.h>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "binet/commands.hpp"
#include "binet/binio.hpp"
#include "binet/error.hpp"

namespace {

void report_error(binet::ErrorCategory c, const std::string& msg) {
  std::cerr << "error: category=" << binet::category_name(c) << " message=\"" << msg << "\"\n";
}

}  // namespace

int main(int argc, char** argv) {
  // Training reallocates the same large buffers every minibatch; keep them
  // in the heap rather than mapping fresh pages each time.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  CLI::App app{"binet: binarized network training and packed inference"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train a model and write run artifacts");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, estimator, clamp_mode, dataset, data_dir, model, binarizer;
  std::optional<double> epsilon, lr;
  std::optional<int> epochs;
  std::optional<std::string> resume;
  std::vector<std::string> sets;
  train->add_option("--config", config_path, "key=value or JSON config file");
  train->add_option("--seed", seed);
  train->add_option("--out", out, "output directory");
  train->add_option("--estimator", estimator, "dte | ede | clip | identity");
  train->add_option("--clamp-mode", clamp_mode, "literal | active-region");
  train->add_option("--epsilon", epsilon);
  train->add_option("--dataset", dataset, "mnist | cifar10 | two-gaussians | patterns");
  train->add_option("--data-dir", data_dir);
  train->add_option("--epochs", epochs);
  train->add_option("--model", model, "mlp | cnn4 | vgg_small | resnet20");
  train->add_option("--binarizer", binarizer, "imb | balance | vanilla");
  train->add_option("--lr", lr);
  train->add_option("--set", sets, "extra key=value override (repeatable)");
  train->add_option("--resume", resume, "continue from a checkpoint in the same --out");

  // eval
  auto* eval = app.add_subcommand("eval", "Test-split accuracy of a checkpoint or packed model");
  binet::EvalTarget target;
  std::string eval_model;
  eval->add_option("model", eval_model, "checkpoint (.bin) or packed model file")->required();
  eval->add_option("--dataset", target.dataset);
  eval->add_option("--data-dir", target.data_dir);
  eval->add_option("--seed", target.seed);

  // bench
  auto* bench = app.add_subcommand("bench", "Packed vs float convolution timing");
  std::vector<std::string> geometries{"256x256x3x14x14"};
  int reps = 100;
  std::uint64_t bench_seed = 0;
  std::optional<std::string> bench_out;
  bench->add_option("--geometry", geometries, "CinxCoutxKxHxW (repeatable)");
  bench->add_option("--reps", reps);
  bench->add_option("--seed", bench_seed);
  bench->add_option("--out", bench_out, "write the JSON report here as well");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Per-layer binarization report as CSV");
  std::string inspect_ckpt;
  std::optional<double> delta;
  std::optional<std::string> inspect_out;
  inspect->add_option("checkpoint", inspect_ckpt)->required();
  inspect->add_option("--delta", delta, "updatable threshold relative to peak");
  inspect->add_option("--out", inspect_out);

  // export
  auto* exp = app.add_subcommand("export", "Write the packed deployment model");
  std::string export_ckpt, export_out;
  exp->add_option("checkpoint", export_ckpt)->required();
  exp->add_option("--out", export_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(binet::ErrorCategory::config, e.what());
    return binet::exit_code(binet::ErrorCategory::config);
  }

  try {
    if (*train) {
      binet::RunConfig cfg;
      if (!config_path.empty()) cfg = binet::load_run_config(config_path);
      auto set = [&](const char* key, const auto& v) {
        if (!v) return;
        if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>) {
          binet::set_config_value(cfg, key, *v);
        } else if constexpr (std::is_floating_point_v<std::decay_t<decltype(*v)>>) {
          char buf[40];
          std::snprintf(buf, sizeof buf, "%.17g", *v);
          binet::set_config_value(cfg, key, buf);
        } else {
          binet::set_config_value(cfg, key, std::to_string(*v));
        }
      };
      set("seed", seed);
      set("out", out);
      set("estimator", estimator);
      set("clamp_mode", clamp_mode);
      set("epsilon", epsilon);
      set("dataset", dataset);
      set("data_dir", data_dir);
      set("epochs", epochs);
      set("model", model);
      set("binarizer", binarizer);
      set("lr", lr);
      for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw binet::ConfigError("--set expects key=value, got '" + kv + "'");
        binet::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
      }
      cfg.validate();
      std::optional<std::filesystem::path> resume_path;
      if (resume) resume_path = *resume;
      const auto outcome = binet::cmd_train(cfg, resume_path, &std::cerr);
      std::cout << outcome.last_checkpoint.string() << "\n";
    } else if (*eval) {
      target.model = eval_model;
      const auto r = binet::cmd_eval(target);
      std::printf("{\"accuracy\":%.9g,\"loss\":%.9g}\n", r.accuracy, r.loss);
    } else if (*bench) {
      std::vector<binet::BenchGeometry> geoms;
      for (const auto& g : geometries) geoms.push_back(binet::BenchGeometry::parse(g));
      std::optional<std::filesystem::path> path;
      if (bench_out) path = *bench_out;
      for (const auto& r : binet::cmd_bench(geoms, reps, bench_seed, path)) {
        std::cout << binet::bench_json(r) << "\n";
      }
    } else if (*inspect) {
      const std::string csv = binet::inspect_csv(binet::cmd_inspect(inspect_ckpt, delta));
      if (inspect_out) {
        binet::binio::write_text_atomic(*inspect_out, csv);
      } else {
        std::cout << csv;
      }
    } else if (*exp) {
      std::cout << binet::export_json(binet::cmd_export(export_ckpt, export_out)) << "\n";
    }
  } catch (const binet::Error& e) {
    report_error(e.category(), e.what());
    return binet::exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: category=internal message=\"" << e.what() << "\"\n";
    return 1;
  }
  return 0;
}
