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
#include <vector>

#include <opencv2/core.hpp>
#include <torch/types.h>

namespace stgen::io {

/// 8-bit RGB raster, channel order R,G,B (OpenCV's BGR is only used at the
/// file boundary).
using RgbImage = cv::Mat;

/// Reads any format OpenCV decodes. Throws ImageReadError.
RgbImage read_image(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG. Throws OutputUnwritable.
void write_png(const std::filesystem::path& path, const RgbImage& image);

/// uint8 [0,255] -> float [-1,1], layout 3 x H x W.
torch::Tensor to_tensor(const RgbImage& image);

/// float 3 x H x W in [-1,1] -> uint8 with a linear rescale and
/// round-half-even; values outside [-1,1] are clamped.
RgbImage from_tensor(const torch::Tensor& pixels);

RgbImage resize(const RgbImage& image, int height, int width);

/// Aspect-preserving resize to the given height (width at least 1).
RgbImage resize_to_height(const RgbImage& image, int height);

/// Mean of `widths` rounded up to a multiple of 4. Throws EmptyBatch.
int batch_width(const std::vector<int>& widths);

/// Resizes a 3 x H x W float tensor (area when shrinking, bilinear otherwise).
torch::Tensor resize_tensor(const torch::Tensor& chw, int height, int width);

}  // namespace stgen::io
