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

#include "stgen/renderer/font.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>

#define STB_TRUETYPE_IMPLEMENTATION
#include "stb_truetype.h"

#include "stgen/common/errors.hpp"
#include "stgen/common/utf8.hpp"

#ifndef STGEN_ASSET_DIR
#define STGEN_ASSET_DIR "assets"
#endif

namespace stgen::renderer {

// Glyph box height as a fraction of the canvas height.
constexpr double kEmFraction = 0.75;

struct Font::Impl {
  std::vector<unsigned char> data;
  stbtt_fontinfo info{};
  int ascent = 0;
  int descent = 0;

  float scale_for(int height) const {
    return stbtt_ScaleForPixelHeight(&info, static_cast<float>(height * kEmFraction));
  }
};

Font::Font(std::string id, std::unique_ptr<Impl> impl)
    : id_(std::move(id)), impl_(std::move(impl)) {}

Font::~Font() = default;

std::shared_ptr<const Font> Font::load(const std::filesystem::path& path) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const Font>> cache;

  std::error_code ec;
  auto canonical = std::filesystem::weakly_canonical(path, ec);
  const std::string key = ec ? path.string() : canonical.string();

  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  std::ifstream in(path, std::ios::binary);
  if (!in) throw FontLoadError("cannot open font: " + path.string());
  auto impl = std::make_unique<Impl>();
  impl->data.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  if (impl->data.empty()) throw FontLoadError("empty font file: " + path.string());
  const int offset = stbtt_GetFontOffsetForIndex(impl->data.data(), 0);
  if (offset < 0 || !stbtt_InitFont(&impl->info, impl->data.data(), offset)) {
    throw FontLoadError("not a TrueType font: " + path.string());
  }
  int line_gap = 0;
  stbtt_GetFontVMetrics(&impl->info, &impl->ascent, &impl->descent, &line_gap);

  std::shared_ptr<const Font> font(new Font(key, std::move(impl)));
  cache.emplace(key, font);
  return font;
}

bool Font::has_glyph(char32_t codepoint) const {
  return stbtt_FindGlyphIndex(&impl_->info, static_cast<int>(codepoint)) != 0;
}

void Font::check_coverage(std::u32string_view text) const {
  for (char32_t cp : text) {
    if (!has_glyph(cp)) throw MissingGlyph(cp, utf8::encode(cp));
  }
}

double Font::advance(std::u32string_view text, int height) const {
  const float scale = impl_->scale_for(height);
  double pen = 0.0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    int adv = 0;
    int lsb = 0;
    stbtt_GetCodepointHMetrics(&impl_->info, static_cast<int>(text[i]), &adv, &lsb);
    pen += adv * scale;
    if (i + 1 < text.size()) {
      pen += scale * stbtt_GetCodepointKernAdvance(&impl_->info, static_cast<int>(text[i]),
                                                   static_cast<int>(text[i + 1]));
    }
  }
  return pen;
}

Coverage Font::rasterize(std::u32string_view text, int height, int width, double left) const {
  Coverage cov;
  cov.height = height;
  cov.width = width;
  cov.alpha.assign(static_cast<std::size_t>(height) * width, 0.0f);

  const float scale = impl_->scale_for(height);
  const double box = (impl_->ascent - impl_->descent) * scale;
  const double baseline = (height - box) / 2.0 + impl_->ascent * scale;
  const int base_y = static_cast<int>(std::floor(baseline));
  const float shift_y = static_cast<float>(baseline - base_y);

  std::vector<unsigned char> glyph;
  double pen = left;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const int cp = static_cast<int>(text[i]);
    const int pen_x = static_cast<int>(std::floor(pen));
    const float shift_x = static_cast<float>(pen - pen_x);
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    stbtt_GetCodepointBitmapBoxSubpixel(&impl_->info, cp, scale, scale, shift_x, shift_y, &x0,
                                        &y0, &x1, &y1);
    const int gw = x1 - x0;
    const int gh = y1 - y0;
    if (gw > 0 && gh > 0) {
      glyph.assign(static_cast<std::size_t>(gw) * gh, 0);
      stbtt_MakeCodepointBitmapSubpixel(&impl_->info, glyph.data(), gw, gh, gw, scale, scale,
                                        shift_x, shift_y, cp);
      for (int gy = 0; gy < gh; ++gy) {
        const int y = base_y + y0 + gy;
        if (y < 0 || y >= height) continue;
        for (int gx = 0; gx < gw; ++gx) {
          const int x = pen_x + x0 + gx;
          if (x < 0 || x >= width) continue;
          float& a = cov.alpha[static_cast<std::size_t>(y) * width + x];
          a = std::min(1.0f, a + glyph[static_cast<std::size_t>(gy) * gw + gx] / 255.0f);
        }
      }
    }
    int adv = 0;
    int lsb = 0;
    stbtt_GetCodepointHMetrics(&impl_->info, cp, &adv, &lsb);
    pen += adv * scale;
    if (i + 1 < text.size()) {
      pen += scale * stbtt_GetCodepointKernAdvance(&impl_->info, cp, static_cast<int>(text[i + 1]));
    }
  }
  return cov;
}

std::filesystem::path default_font_path() {
  if (const char* env = std::getenv("STGEN_FONT")) return env;
  return std::filesystem::path(STGEN_ASSET_DIR) / "fonts" / "DejaVuSans.ttf";
}

std::vector<std::filesystem::path> bundled_fonts() {
  std::vector<std::filesystem::path> fonts;
  const auto dir = std::filesystem::path(STGEN_ASSET_DIR) / "fonts";
  if (!std::filesystem::is_directory(dir)) return fonts;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".ttf") fonts.push_back(entry.path());
  }
  std::sort(fonts.begin(), fonts.end());
  return fonts;
}

std::filesystem::path bundled_font(const std::string& file_name) {
  for (auto& path : bundled_fonts()) {
    if (path.filename() == file_name) return path;
  }
  throw FontLoadError("no bundled font named '" + file_name + "'");
}

}  // namespace stgen::renderer
