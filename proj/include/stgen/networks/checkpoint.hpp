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

#include <torch/torch.h>

#include "stgen/networks/config.hpp"
#include "stgen/networks/generator.hpp"

namespace stgen::networks {

constexpr std::int64_t kCheckpointVersion = 1;

/// Every checkpoint archive starts with these entries; tensors of each
/// module live in a nested archive keyed by the module name.
struct CheckpointHeader {
  std::int64_t version = kCheckpointVersion;
  std::string kind;    // "generator", "training", "typeface"
  std::string config;  // canonical key=value text of the architecture
  std::uint64_t fingerprint = 0;
};

void write_header(torch::serialize::OutputArchive& archive, const CheckpointHeader& header);
/// Throws CheckpointError for missing entries or an unsupported version.
CheckpointHeader read_header(torch::serialize::InputArchive& archive);

void save_module(torch::serialize::OutputArchive& archive, const std::string& key,
                 const torch::nn::Module& module);
/// Throws CheckpointMismatch when the stored tensors do not fit `module`.
void load_module(torch::serialize::InputArchive& archive, const std::string& key,
                 torch::nn::Module& module);

/// Throws OutputUnwritable.
void save_archive(torch::serialize::OutputArchive& archive, const std::filesystem::path& path);
/// Throws CheckpointError.
void load_archive(torch::serialize::InputArchive& archive, const std::filesystem::path& path);

/// Generator-only checkpoint for inference.
void save_generator(const std::filesystem::path& path, Generator& generator);

/// Loads any checkpoint holding a generator. When `expected` is given the
/// stored fingerprint must equal expected->fingerprint(), otherwise
/// CheckpointMismatch. The result is in eval mode.
Generator load_generator(const std::filesystem::path& path,
                         const GeneratorConfig* expected = nullptr,
                         attention::Backend backend = attention::Backend::kOpenMP);

}  // namespace stgen::networks
