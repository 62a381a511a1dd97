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

#pragma once

#include <cstdint>
#include <string>

#include "stgen/attention/modules.hpp"

namespace stgen::networks {

constexpr std::int64_t kStyleDim = 128;
constexpr std::int64_t kImageHeight = 64;
constexpr double kNormEps = 1e-5;

/// Architecture hyperparameters. `base_channels` scales every layer width;
/// 64 gives the reference widths (content features 128 / 256 channels).
struct GeneratorConfig {
  std::int64_t base_channels = 64;
  std::int64_t mapping_hidden = 256;
  std::int64_t num_domains = 2;
  std::int64_t patch_size = 3;
  std::int64_t dense_depth = 3;
  std::int64_t local_hidden = 0;
  bool normalize_local = false;
  bool global_attention_low = true;
  bool local_attention_high = true;
  // Kernel backend is a runtime choice and not part of the fingerprint.
  attention::Backend backend = attention::Backend::kOpenMP;

  template <class F>
  void for_each_field(F&& f) {
    f("base_channels", base_channels);
    f("mapping_hidden", mapping_hidden);
    f("num_domains", num_domains);
    f("patch_size", patch_size);
    f("dense_depth", dense_depth);
    f("local_hidden", local_hidden);
    f("normalize_local", normalize_local);
    f("global_attention_low", global_attention_low);
    f("local_attention_high", local_attention_high);
  }

  /// Throws ConfigError on nonpositive widths or counts.
  void validate() const;
  attention::AttentionOptions attention_options() const;
  std::string describe() const;
  std::uint64_t fingerprint() const;
  static GeneratorConfig parse(const std::string& text);
};

}  // namespace stgen::networks
