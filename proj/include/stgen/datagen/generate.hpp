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
#include <random>
#include <string_view>
#include <vector>

#include "stgen/datagen/dataset.hpp"
#include "stgen/networks/generator.hpp"
#include "stgen/renderer/corpus.hpp"
#include "stgen/renderer/font.hpp"
#include "stgen/renderer/render.hpp"

namespace stgen::datagen {

struct SynthOptions {
  std::vector<std::filesystem::path> fonts;
  /// Label written for each font; empty means the font's index.
  std::vector<std::int64_t> font_labels;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  int height = 64;
  renderer::LengthRange length{1, 64};
  /// Random background and a contrasting random text colour per sample.
  bool random_colors = true;
};

/// Random background with a random text colour whose luminance differs by
/// at least 96 (of 255).
renderer::TextStyle random_text_style(std::mt19937_64& rng);

struct SynthSet {
  std::vector<Record> records;
  std::vector<io::RgbImage> images;
};

/// Word images rendered round-robin over the fonts with corpus text.
/// Throws EmptyCorpus, FontLoadError, ConfigError.
SynthSet synthesize(const renderer::TextCorpus& corpus, const SynthOptions& options);

/// Renders `text` as a content image, generates with the style image
/// (resized to height 64 and the content width) and returns the result.
/// Throws MissingGlyph / EmptyText before any generation happens.
io::RgbImage replace_text(networks::Generator& generator, const io::RgbImage& style_image,
                          std::string_view text, const renderer::Font& font);

struct GenerateRequest {
  std::vector<std::filesystem::path> styles;
  renderer::TextCorpus texts;
  std::size_t n = 0;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  std::int64_t domain = 1;
  std::filesystem::path font;  // empty: the default content font
};

/// Pairs uniformly drawn style images with uniformly drawn texts until n
/// samples were written; failing samples are logged and replaced.
/// Throws EmptyCorpus, OutputUnwritable, GenerationFailed.
LabeledDataset generate_dataset(networks::Generator& generator, const GenerateRequest& request);

/// Loads the generator from `checkpoint` first; a non-null `expected`
/// config must match the stored fingerprint (CheckpointMismatch).
LabeledDataset generate_dataset(const std::filesystem::path& checkpoint,
                                const GenerateRequest& request,
                                const networks::GeneratorConfig* expected = nullptr);

}  // namespace stgen::datagen
