// Copyright 2026 The stgen Authors. All Rights Reserved.
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

#include "stgen/training/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stgen/common/errors.hpp"
#include "stgen/common/keyvalue.hpp"

namespace stgen::training {

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size <= 0 || typeface_batch_size <= 0) throw ConfigError("batch sizes must be positive");
  if (lr <= 0.0) throw ConfigError("lr must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (max_steps < 0) throw ConfigError("max_steps must be >= 0");
  if (checkpoint_every <= 0) throw ConfigError("checkpoint_every must be positive");
  if (content_loss_levels != "top" && content_loss_levels != "all") {
    throw ConfigError("content_loss_levels must be 'top' or 'all'");
  }
  weights.validate();
  model.validate();
}

std::string TrainConfig::describe() const { return describe_fields(*this); }

namespace {

TrainConfig from_key_values(KeyValues kv) {
  TrainConfig config;
  apply_fields(config, kv);
  if (!kv.empty()) throw ConfigError("unknown config key '" + kv.begin()->first + "'");
  config.validate();
  return config;
}

}  // namespace

TrainConfig parse_train_config(const std::string& text) {
  return from_key_values(parse_key_values(text));
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  KeyValues kv;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    kv = parse_key_values(buffer.str());
  }
  TrainConfig probe;
  probe.for_each_field([&](std::string_view name, auto&) {
    std::string env = kEnvPrefix;
    for (char c : name) env += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (const char* value = std::getenv(env.c_str())) kv[std::string(name)] = value;
  });
  return from_key_values(std::move(kv));
}

}  // namespace stgen::training
