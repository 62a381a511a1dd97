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

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace stgen::renderer {

/// Coverage bitmap of a rendered string, values in [0,1], row-major.
struct Coverage {
  int height = 0;
  int width = 0;
  std::vector<float> alpha;
};

/// A loaded TrueType font. Immutable after load; safe to share across threads.
class Font {
 public:
  /// Loads (or returns the cached instance of) the font at `path`.
  /// Throws FontLoadError if the file is unreadable or not a font.
  static std::shared_ptr<const Font> load(const std::filesystem::path& path);

  ~Font();
  Font(const Font&) = delete;
  Font& operator=(const Font&) = delete;

  const std::string& id() const { return id_; }
  bool has_glyph(char32_t codepoint) const;

  /// Throws MissingGlyph for the first code point absent from the font.
  void check_coverage(std::u32string_view text) const;

  /// Horizontal advance of `text` in pixels when laid out on a canvas of
  /// `height` pixels (kerning included, margins excluded).
  double advance(std::u32string_view text, int height) const;

  /// Rasterizes `text` left to right, vertically centred, starting at
  /// `left` pixels, onto a canvas of the given size. Antialiased.
  Coverage rasterize(std::u32string_view text, int height, int width, double left) const;

 private:
  struct Impl;
  explicit Font(std::string id, std::unique_ptr<Impl> impl);

  std::string id_;
  std::unique_ptr<Impl> impl_;
};

/// Repository default content font.
std::filesystem::path default_font_path();

/// All bundled fonts, sorted by file name.
std::vector<std::filesystem::path> bundled_fonts();

/// Bundled font by file name, e.g. "DejaVuSerif.ttf". Throws FontLoadError.
std::filesystem::path bundled_font(const std::string& file_name);

}  // namespace stgen::renderer
