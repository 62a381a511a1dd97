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

#include "stgen/datagen/generate.hpp"

#include <cstdio>
#include <fstream>
#include <random>

#include "stgen/common/errors.hpp"
#include "stgen/common/log.hpp"
#include "stgen/networks/checkpoint.hpp"
#include "stgen/renderer/render.hpp"

namespace stgen::datagen {

namespace fs = std::filesystem;

namespace {

std::string numbered_png(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.png", i);
  return buf;
}

double luminance(const renderer::Rgb& c) {
  return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
}

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / kImageDir, ec);
  const auto probe = dir / ".write_probe";
  std::ofstream out(probe);
  if (ec || !out) throw OutputUnwritable("output directory is not writable: " + dir.string());
  out.close();
  fs::remove(probe, ec);
}

}  // namespace

renderer::TextStyle random_text_style(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> channel(0, 255);
  renderer::TextStyle style;
  auto draw = [&] {
    return renderer::Rgb{static_cast<std::uint8_t>(channel(rng)),
                         static_cast<std::uint8_t>(channel(rng)),
                         static_cast<std::uint8_t>(channel(rng))};
  };
  style.background = draw();
  do {
    style.foreground = draw();
  } while (std::abs(luminance(style.foreground) - luminance(style.background)) < 96.0);
  return style;
}

SynthSet synthesize(const renderer::TextCorpus& corpus, const SynthOptions& options) {
  if (corpus.empty()) throw EmptyCorpus("synthesis needs a nonempty text corpus");
  if (options.fonts.empty()) throw ConfigError("synthesis needs at least one font");
  if (!options.font_labels.empty() && options.font_labels.size() != options.fonts.size()) {
    throw ConfigError("one label per font required");
  }
  std::vector<std::shared_ptr<const renderer::Font>> fonts;
  for (const auto& path : options.fonts) fonts.push_back(renderer::Font::load(path));

  std::mt19937_64 rng(options.seed);
  SynthSet out;
  std::size_t failures = 0;
  while (out.records.size() < options.count) {
    const auto font_index = out.records.size() % fonts.size();
    const auto text = renderer::sample_random_text(corpus, options.length, rng);
    const auto style = options.random_colors ? random_text_style(rng) : renderer::TextStyle{};
    try {
      out.images.push_back(renderer::render_text(*fonts[font_index], text, options.height, style));
    } catch (const MissingGlyph& e) {
      if (++failures > 100 + 10 * options.count) throw;
      continue;
    }
    const auto label = options.font_labels.empty() ? static_cast<std::int64_t>(font_index)
                                                   : options.font_labels[font_index];
    out.records.push_back({numbered_png(out.records.size()), text, label});
  }
  return out;
}

io::RgbImage replace_text(networks::Generator& generator, const io::RgbImage& style_image,
                          std::string_view text, const renderer::Font& font) {
  const auto content = renderer::render_content(text, networks::kImageHeight, font);
  const auto style = io::resize(style_image, networks::kImageHeight, content.width());
  torch::NoGradGuard no_grad;
  const bool was_training = generator->is_training();
  generator->eval();
  const auto out =
      generator->forward(io::to_tensor(style).unsqueeze(0), content.pixels.unsqueeze(0));
  generator->train(was_training);
  return io::from_tensor(out.squeeze(0));
}

LabeledDataset generate_dataset(networks::Generator& generator, const GenerateRequest& request) {
  if (request.texts.empty()) throw EmptyCorpus("text corpus is empty");
  if (request.styles.empty()) throw EmptyCorpus("no style images given");
  ensure_writable(request.out_dir);
  const auto font =
      renderer::Font::load(request.font.empty() ? renderer::default_font_path() : request.font);

  std::mt19937_64 rng(request.seed);
  std::uniform_int_distribution<std::size_t> pick_style(0, request.styles.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_text(0, request.texts.size() - 1);
  std::vector<Record> records;
  const std::size_t max_attempts = 10 * request.n + 100;
  std::size_t attempts = 0;
  while (records.size() < request.n) {
    if (attempts++ >= max_attempts) {
      throw GenerationFailed("only " + std::to_string(records.size()) + " of " +
                             std::to_string(request.n) + " samples could be generated");
    }
    const auto& style_path = request.styles[pick_style(rng)];
    const auto& text = request.texts.entries()[pick_text(rng)];
    try {
      const auto image = replace_text(generator, io::read_image(style_path), text, *font);
      Record record{numbered_png(records.size()), text, request.domain};
      io::write_png(request.out_dir / kImageDir / record.filename, image);
      records.push_back(std::move(record));
    } catch (const OutputUnwritable&) {
      throw;
    } catch (const Error& e) {
      log::warn("skipping sample (", style_path.filename().string(), " + '", text, "'): ",
                e.what());
    }
  }
  write_manifest(request.out_dir, records);
  return LabeledDataset(request.out_dir, std::move(records));
}

LabeledDataset generate_dataset(const fs::path& checkpoint, const GenerateRequest& request,
                                const networks::GeneratorConfig* expected) {
  auto generator = networks::load_generator(checkpoint, expected);
  return generate_dataset(generator, request);
}

}  // namespace stgen::datagen
