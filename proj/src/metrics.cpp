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

#include "binet/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace binet {
namespace {

constexpr const char* kLayerColumns[] = {"entropy", "p_plus", "act_entropy", "t",     "k",
                                         "t_eps",   "t_100",  "updatable",   "active", "flip",
                                         "err_l1",  "err_l2", "shift"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string metrics_csv_header(std::size_t layer_count) {
  std::string h = "epoch,lr,train_loss,train_acc,test_loss,test_acc";
  for (std::size_t j = 0; j < layer_count; ++j) {
    for (const char* col : kLayerColumns) h += ",L" + std::to_string(j) + "_" + col;
  }
  return h;
}

std::string metrics_csv_row(const MetricsRecord& r) {
  std::string row = std::to_string(r.epoch) + "," + num(r.lr) + "," + num(r.train_loss) + "," +
                    num(r.train_accuracy) + "," + num(r.test_loss) + "," + num(r.test_accuracy);
  for (const LayerMetrics& l : r.layers) {
    for (double v : {l.entropy, l.p_plus, l.act_entropy, l.t, l.k, l.t_eps, l.t_100,
                     l.updatable_fraction, l.active_fraction, l.sign_flip_rate, l.error_l1,
                     l.error_l2}) {
      row += "," + num(v);
    }
    row += "," + std::to_string(l.shift);
  }
  return row;
}

std::string metrics_json(const MetricsRecord& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["lr"] = r.lr;
  j["train_loss"] = r.train_loss;
  j["train_acc"] = r.train_accuracy;
  j["test_loss"] = r.test_loss;
  j["test_acc"] = r.test_accuracy;
  j["layers"] = nlohmann::ordered_json::array();
  for (const LayerMetrics& l : r.layers) {
    nlohmann::ordered_json lj;
    lj["name"] = l.name;
    lj["entropy"] = l.entropy;
    lj["p_plus"] = l.p_plus;
    lj["act_entropy"] = l.act_entropy;
    lj["t"] = l.t;
    lj["k"] = l.k;
    lj["t_eps"] = l.t_eps;
    lj["t_100"] = l.t_100;
    lj["updatable"] = l.updatable_fraction;
    lj["active"] = l.active_fraction;
    lj["flip"] = l.sign_flip_rate;
    lj["err_l1"] = l.error_l1;
    lj["err_l2"] = l.error_l2;
    lj["shift"] = l.shift;
    j["layers"].push_back(std::move(lj));
  }
  return j.dump();
}

}  // namespace binet
