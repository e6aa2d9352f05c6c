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

#include "binet/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "binet/error.hpp"
#include "json.hpp"

namespace binet {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expect) {
  throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) +
                    "' as " + expect);
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) bad_value(key, v, "a number");
  return d;
}

template <typename T>
T to_integer(std::string_view key, std::string_view v) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::string fmt_double(double d) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

}  // namespace

void set_config_value(RunConfig& c, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "model") c.model = value;
  else if (key == "dataset") c.dataset = value;
  else if (key == "data_dir") c.data_dir = value;
  else if (key == "epochs") c.epochs = to_integer<int>(key, value);
  else if (key == "lr") c.lr = to_double(key, value);
  else if (key == "momentum") c.momentum = to_double(key, value);
  else if (key == "weight_decay") c.weight_decay = to_double(key, value);
  else if (key == "batch_size") c.batch_size = to_integer<std::size_t>(key, value);
  else if (key == "seed") c.seed = to_integer<std::uint64_t>(key, value);
  else if (key == "estimator") c.estimator = dte::parse_estimator_mode(value);
  else if (key == "clamp_mode") c.clamp_mode = dte::parse_clamp_mode(value);
  else if (key == "epsilon") c.epsilon = to_double(key, value);
  else if (key == "t_min") c.t_min = to_double(key, value);
  else if (key == "t_max") c.t_max = to_double(key, value);
  else if (key == "delta") c.delta = to_double(key, value);
  else if (key == "binarizer") c.binarizer = parse_weight_binarizer(value);
  else if (key == "binarize_activations") c.binarize_activations = to_bool(key, value);
  else if (key == "augment") c.augment = to_bool(key, value);
  else if (key == "checkpoint_every") c.checkpoint_every = to_integer<int>(key, value);
  else if (key == "out") c.out = value;
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void merge_run_config(RunConfig& cfg, std::string_view text) {
  const std::string_view body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("invalid JSON config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("JSON config must be an object");
    for (const auto& [key, v] : j.items()) {
      if (v.is_string()) set_config_value(cfg, key, v.get<std::string>());
      else if (v.is_boolean()) set_config_value(cfg, key, v.get<bool>() ? "true" : "false");
      else if (v.is_number_integer() || v.is_number_unsigned()) set_config_value(cfg, key, v.dump());
      else if (v.is_number_float()) set_config_value(cfg, key, fmt_double(v.get<double>()));
      else throw ConfigError("config key '" + key + "' has an unsupported JSON type");
    }
  } else {
    std::istringstream in{std::string(body)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view l = line;
      if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
      l = trim(l);
      if (l.empty()) continue;
      const auto eq = l.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
      }
      set_config_value(cfg, trim(l.substr(0, eq)), l.substr(eq + 1));
    }
  }
  cfg.validate();
}

RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  merge_run_config(cfg, text);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string serialize_run_config(const RunConfig& c) {
  std::ostringstream o;
  o << "model=" << c.model << '\n'
    << "dataset=" << c.dataset << '\n'
    << "data_dir=" << c.data_dir << '\n'
    << "epochs=" << c.epochs << '\n'
    << "lr=" << fmt_double(c.lr) << '\n'
    << "momentum=" << fmt_double(c.momentum) << '\n'
    << "weight_decay=" << fmt_double(c.weight_decay) << '\n'
    << "batch_size=" << c.batch_size << '\n'
    << "seed=" << c.seed << '\n'
    << "estimator=" << dte::to_string(c.estimator) << '\n'
    << "clamp_mode=" << dte::to_string(c.clamp_mode) << '\n'
    << "epsilon=" << fmt_double(c.epsilon) << '\n'
    << "t_min=" << fmt_double(c.t_min) << '\n'
    << "t_max=" << fmt_double(c.t_max) << '\n'
    << "delta=" << fmt_double(c.delta) << '\n'
    << "binarizer=" << to_string(c.binarizer) << '\n'
    << "binarize_activations=" << (c.binarize_activations ? "true" : "false") << '\n'
    << "augment=" << (c.augment ? "true" : "false") << '\n'
    << "checkpoint_every=" << c.checkpoint_every << '\n'
    << "out=" << c.out << '\n';
  return o.str();
}

void RunConfig::validate() const {
  if (model.empty()) throw ConfigError("model must be set");
  if (dataset.empty()) throw ConfigError("dataset must be set");
  if (checkpoint_every <= 0) throw ConfigError("checkpoint_every must be positive");
  train_config().validate();
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.epochs = epochs;
  t.lr0 = lr;
  t.momentum = momentum;
  t.weight_decay = weight_decay;
  t.batch_size = batch_size;
  t.seed = seed;
  t.schedule.mode = estimator;
  t.schedule.clamp = clamp_mode;
  t.schedule.epsilon = epsilon;
  t.schedule.t_min = t_min;
  t.schedule.t_max = t_max;
  t.delta = delta;
  t.binarizer = binarizer;
  t.binarize_activations = binarize_activations;
  t.augment = augment;
  return t;
}

}  // namespace binet
