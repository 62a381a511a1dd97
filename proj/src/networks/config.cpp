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

#include "stgen/networks/config.hpp"

#include "stgen/common/errors.hpp"
#include "stgen/common/hash.hpp"
#include "stgen/common/keyvalue.hpp"

namespace stgen::networks {

void GeneratorConfig::validate() const {
  auto positive = [](const char* name, std::int64_t v) {
    if (v <= 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive("base_channels", base_channels);
  positive("mapping_hidden", mapping_hidden);
  positive("num_domains", num_domains);
  positive("dense_depth", dense_depth);
  if (patch_size < 1 || patch_size % 2 == 0) throw ConfigError("patch_size must be odd");
  if (local_hidden < 0) throw ConfigError("local_hidden must be >= 0");
}

attention::AttentionOptions GeneratorConfig::attention_options() const {
  attention::AttentionOptions o;
  o.patch_size = patch_size;
  o.dense_depth = dense_depth;
  o.local_hidden = local_hidden;
  o.normalize_local = normalize_local;
  o.global_attention_low = global_attention_low;
  o.local_attention_high = local_attention_high;
  o.backend = backend;
  return o;
}

std::string GeneratorConfig::describe() const { return describe_fields(*this); }

std::uint64_t GeneratorConfig::fingerprint() const { return fnv1a(describe()); }

GeneratorConfig GeneratorConfig::parse(const std::string& text) {
  auto kv = parse_key_values(text);
  GeneratorConfig config;
  apply_fields(config, kv);
  if (!kv.empty()) throw ConfigError("unknown generator key '" + kv.begin()->first + "'");
  config.validate();
  return config;
}

}  // namespace stgen::networks
