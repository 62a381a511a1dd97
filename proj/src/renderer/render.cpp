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

#include "stgen/renderer/render.hpp"

#include <algorithm>
#include <cmath>

#include "stgen/common/errors.hpp"
#include "stgen/common/utf8.hpp"

namespace stgen::renderer {

namespace {

int round_up4(int v) { return (v + 3) / 4 * 4; }

}  // namespace

int canvas_width(const Font& font, std::u32string_view text, int height, double margin_fraction) {
  const double margin = margin_fraction * height;
  const int raw = static_cast<int>(std::ceil(font.advance(text, height) + 2.0 * margin));
  return std::max(round_up4(raw), round_up4(std::max(4, height / 2)));
}

io::RgbImage render_text(const Font& font, std::string_view text, int height,
                         const TextStyle& style) {
  if (text.empty()) throw EmptyText("cannot render empty text");
  if (height < 16) throw ShapeError("render height must be at least 16");
  const std::u32string cps = utf8::decode(text);
  font.check_coverage(cps);

  const int width = canvas_width(font, cps, height, style.margin_fraction);
  const Coverage cov = font.rasterize(cps, height, width, style.margin_fraction * height);

  io::RgbImage out(height, width, CV_8UC3);
  for (int i = 0; i < height * width; ++i) {
    const float a = cov.alpha[i];
    for (int c = 0; c < 3; ++c) {
      const float v = style.background[c] * (1.0f - a) + style.foreground[c] * a;
      out.data[3 * i + c] = static_cast<unsigned char>(std::lround(v));
    }
  }
  return out;
}

ContentImage render_content(std::string_view text, int height, const Font& font) {
  return ContentImage{io::to_tensor(render_text(font, text, height, TextStyle{})),
                      std::string(text)};
}

}  // namespace stgen::renderer
