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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "binet/checkpoint.hpp"
#include "binet/commands.hpp"
#include "binet/config.hpp"
#include "binet/error.hpp"

namespace {

using namespace binet;
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

struct Proc {
  int status = -1;
  std::string output;
};

Proc run_cli(const std::string& args) {
  const std::string cmd = std::string(BINET_CLI_PATH) + " " + args + " 2>&1";
  Proc p;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return p;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, f)) p.output.append(buf, n);
  const int raw = pclose(f);
  p.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return p;
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;
  void SetUp() override {
    dir = fs::temp_directory_path() /
          (std::string("binet_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  RunConfig synth_config(const std::string& out, int epochs) const {
    RunConfig c;
    c.model = "cnn4";
    c.dataset = "patterns";
    c.epochs = epochs;
    c.batch_size = 50;
    c.seed = 5;
    c.checkpoint_every = 2;
    c.out = (dir / out).string();
    return c;
  }
};

TEST_F(Cli, TrainWritesOneRowPerEpoch) {
  const RunConfig cfg = synth_config("run", 5);
  const auto outcome = cmd_train(cfg);
  const fs::path out = cfg.out;
  const auto csv = lines(slurp(out / "metrics.csv"));
  ASSERT_EQ(csv.size(), 6u);
  EXPECT_EQ(csv[0], metrics_csv_header(2));
  EXPECT_EQ(lines(slurp(out / "metrics.jsonl")).size(), 5u);
  EXPECT_EQ(outcome.history.size(), 5u);
  for (int k : {2, 4, 5}) {
    EXPECT_TRUE(fs::exists(out / "checkpoints" / ("epoch_" + std::to_string(k) + ".bin"))) << k;
  }
  EXPECT_EQ(outcome.last_checkpoint, out / "checkpoints" / "epoch_5.bin");
  EXPECT_EQ(load_run_config(out / "config.snapshot"), cfg);
  EXPECT_TRUE(fs::exists(out / "report" / "layers.csv"));
  EXPECT_TRUE(fs::exists(out / "report" / "summary.json"));
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    EXPECT_NE(e.path().extension(), ".tmp") << e.path();
  }
}

TEST_F(Cli, SameSeedSameArtifacts) {
  cmd_train(synth_config("a", 2));
  cmd_train(synth_config("b", 2));
  EXPECT_EQ(slurp(dir / "a" / "metrics.csv"), slurp(dir / "b" / "metrics.csv"));
  EXPECT_EQ(slurp(dir / "a" / "checkpoints" / "epoch_2.bin").size(),
            slurp(dir / "b" / "checkpoints" / "epoch_2.bin").size());
}

TEST_F(Cli, ResumeContinuesTheSameTrajectory) {
  cmd_train(synth_config("full", 4));
  cmd_train(synth_config("first", 4));
  cmd_train(synth_config("resumed", 4), dir / "first" / "checkpoints" / "epoch_2.bin");
  const auto full = lines(slurp(dir / "full" / "metrics.csv"));
  const auto cont = lines(slurp(dir / "resumed" / "metrics.csv"));
  // A fresh output directory holds the header and the epochs run after resuming.
  ASSERT_EQ(full.size(), 5u);
  ASSERT_EQ(cont.size(), 3u);
  EXPECT_EQ(cont[0], full[0]);
  EXPECT_EQ(cont[1], full[3]);
  EXPECT_EQ(cont[2], full[4]);
}

TEST_F(Cli, EvalOfExportEqualsEvalOfCheckpoint) {
  const auto outcome = cmd_train(synth_config("run", 2));
  const fs::path packed = dir / "model.bnet";
  const ExportReport rep = cmd_export(outcome.last_checkpoint, packed);
  EXPECT_EQ(rep.ops.float_ops, 0u);
  EXPECT_LE(rep.file_bytes * 8, rep.checkpoint_bytes);
  EXPECT_NE(export_json(rep).find("\"float_ops\":0"), std::string::npos);

  EvalTarget from_ckpt{outcome.last_checkpoint, {}, {}, {}};
  EvalTarget from_packed{packed, std::string("patterns"), {}, std::uint64_t{5}};
  const EvalResult a = cmd_eval(from_ckpt);
  const EvalResult b = cmd_eval(from_packed);
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.loss, b.loss);
}

TEST_F(Cli, InspectShowsBalancedEntropy) {
  const auto outcome = cmd_train(synth_config("run", 3));
  const auto rows = cmd_inspect(outcome.last_checkpoint);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_GE(r.entropy, 0.95 * std::log(2.0)) << r.layer;
    EXPECT_GT(r.updatable_fraction, 0.0);
  }
  const auto csv = lines(inspect_csv(rows));
  ASSERT_EQ(csv.size(), 3u);
  EXPECT_EQ(csv[0], "layer,entropy,p_plus,t,k,t_eps,t_100,updatable_fraction,active_fraction,shift");
}

TEST_F(Cli, BinaryReportsErrorCategories) {
  const Proc missing = run_cli("eval " + (dir / "missing.bin").string());
  EXPECT_EQ(missing.status, exit_code(ErrorCategory::io));
  EXPECT_NE(missing.output.find("category=io"), std::string::npos) << missing.output;

  const Proc bad_key = run_cli("train --set no_such_key=1 --out " + (dir / "x").string());
  EXPECT_EQ(bad_key.status, exit_code(ErrorCategory::config));
  EXPECT_NE(bad_key.output.find("category=config"), std::string::npos) << bad_key.output;

  std::ofstream(dir / "junk.bin") << "definitely not a model";
  const Proc junk = run_cli("eval " + (dir / "junk.bin").string());
  EXPECT_EQ(junk.status, exit_code(ErrorCategory::format));

  const Proc no_sub = run_cli("");
  EXPECT_NE(no_sub.status, 0);
}

TEST_F(Cli, BinaryTrainExportEvalAndBench) {
  const std::string out = (dir / "run").string();
  const Proc train = run_cli("train --dataset patterns --model cnn4 --epochs 2 --seed 3 --out " + out);
  ASSERT_EQ(train.status, 0) << train.output;
  const std::string ckpt = out + "/checkpoints/epoch_2.bin";
  const Proc exp = run_cli("export " + ckpt + " --out " + (dir / "m.bnet").string());
  ASSERT_EQ(exp.status, 0) << exp.output;
  const Proc e1 = run_cli("eval " + ckpt);
  const Proc e2 = run_cli("eval " + (dir / "m.bnet").string() + " --dataset patterns --seed 3");
  ASSERT_EQ(e1.status, 0) << e1.output;
  ASSERT_EQ(e2.status, 0) << e2.output;
  EXPECT_EQ(e1.output, e2.output);

  const Proc inspect = run_cli("inspect " + ckpt);
  ASSERT_EQ(inspect.status, 0) << inspect.output;
  EXPECT_EQ(inspect.output.rfind("layer,entropy", 0), 0u) << inspect.output;

  const fs::path report = dir / "bench.json";
  const Proc bench = run_cli("bench --geometry 8x8x3x6x6 --reps 3 --out " + report.string());
  ASSERT_EQ(bench.status, 0) << bench.output;
  const std::string json = slurp(report);
  for (const char* key : {"\"ns_packed\"", "\"ns_float\"", "\"ratio\"", "\"thread_count\":1"}) {
    EXPECT_NE(json.find(key), std::string::npos) << key;
  }
}

}  // namespace
