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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <torch/types.h>

#include "stgen/io/image.hpp"
#include "stgen/renderer/font.hpp"

namespace stgen::renderer {

constexpr int kDefaultHeight = 64;
constexpr std::uint8_t kContentGrey = 127;

using Rgb = std::array<std::uint8_t, 3>;

struct TextStyle {
  Rgb background{kContentGrey, kContentGrey, kContentGrey};
  Rgb foreground{0, 0, 0};
  double margin_fraction = 0.1;  // of the canvas height, each side
};

/// Rendered text on a plain grey canvas; the content-branch input.
struct ContentImage {
  torch::Tensor pixels;  // float32, 3 x height x width, values in [-1,1]
  std::string text;

  int height() const { return static_cast<int>(pixels.size(1)); }
  int width() const { return static_cast<int>(pixels.size(2)); }
};

/// Canvas width for `text`: advance plus margins, rounded up to a multiple
/// of 4 and never below height / 2.
int canvas_width(const Font& font, std::u32string_view text, int height, double margin_fraction);

/// General text rasterization used for content images and synthetic data.
/// Throws EmptyText, MissingGlyph, ShapeError (height < 16).
io::RgbImage render_text(const Font& font, std::string_view text, int height,
                         const TextStyle& style = {});

/// Standard-font rendering: black glyphs on grey 127.
ContentImage render_content(std::string_view text, int height, const Font& font);

}  // namespace stgen::renderer
