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
#include <filesystem>
#include <string>

#include "stgen/losses/losses.hpp"
#include "stgen/networks/config.hpp"

namespace stgen::training {

inline constexpr const char* kEnvPrefix = "STGEN_";

struct TrainConfig {
  std::int64_t epochs = 200;
  std::int64_t batch_size = 16;
  std::int64_t typeface_batch_size = 256;
  double lr = 1e-4;
  double weight_decay = 1e-4;
  bool decay_norm_params = true;  // false exempts normalization affine parameters
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.99;
  double rmsprop_alpha = 0.99;
  std::int64_t seed = 0;
  std::int64_t max_steps = 0;  // 0: no cap beyond epochs
  std::int64_t checkpoint_every = 1;  // epochs
  bool typeface_loss = true;
  std::string content_loss_levels = "top";  // "top" or "all"
  std::string content_font;  // empty: bundled default
  losses::LossWeights weights;
  networks::GeneratorConfig model;

  template <class F>
  void for_each_field(F&& f) {
    f("epochs", epochs);
    f("batch_size", batch_size);
    f("typeface_batch_size", typeface_batch_size);
    f("lr", lr);
    f("weight_decay", weight_decay);
    f("decay_norm_params", decay_norm_params);
    f("adam_beta1", adam_beta1);
    f("adam_beta2", adam_beta2);
    f("rmsprop_alpha", rmsprop_alpha);
    f("seed", seed);
    f("max_steps", max_steps);
    f("checkpoint_every", checkpoint_every);
    f("typeface_loss", typeface_loss);
    f("content_loss_levels", content_loss_levels);
    f("content_font", content_font);
    weights.for_each_field(f);
    model.for_each_field(f);
  }

  /// Throws ConfigError.
  void validate() const;
  std::string describe() const;
};

/// Parses key = value text. Unknown keys are an error.
TrainConfig parse_train_config(const std::string& text);

/// Reads the file (if the path is nonempty), then applies STGEN_<KEY>
/// environment overrides, e.g. STGEN_BATCH_SIZE=8. Throws ConfigError.
TrainConfig load_train_config(const std::filesystem::path& path);

}  // namespace stgen::training
