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

#include "stgen/io/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <torch/torch.h>

#include "stgen/common/errors.hpp"

namespace stgen::io {

RgbImage read_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw ImageReadError("cannot decode image: " + path.string());
  RgbImage rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return rgb;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  if (image.empty() || image.type() != CV_8UC3) {
    throw OutputUnwritable("refusing to write non-RGB8 image to " + path.string());
  }
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  cv::Mat bgr;
  cv::cvtColor(image, bgr, cv::COLOR_RGB2BGR);
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception& e) {
    throw OutputUnwritable("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw OutputUnwritable("cannot write " + path.string());
}

torch::Tensor to_tensor(const RgbImage& image) {
  if (image.type() != CV_8UC3) throw ShapeError("expected an 8-bit RGB image");
  cv::Mat contiguous = image.isContinuous() ? image : image.clone();
  auto hwc = torch::from_blob(contiguous.data, {contiguous.rows, contiguous.cols, 3},
                              torch::kUInt8)
                 .to(torch::kFloat32);
  return hwc.permute({2, 0, 1}).contiguous().div_(127.5).sub_(1.0);
}

RgbImage from_tensor(const torch::Tensor& pixels) {
  if (pixels.dim() != 3 || pixels.size(0) != 3) {
    throw ShapeError("expected a 3 x H x W tensor");
  }
  auto hwc = pixels.detach().to(torch::kFloat64).permute({1, 2, 0}).contiguous();
  const int h = static_cast<int>(hwc.size(0));
  const int w = static_cast<int>(hwc.size(1));
  RgbImage out(h, w, CV_8UC3);
  const double* src = hwc.data_ptr<double>();
  for (int i = 0; i < h * w * 3; ++i) {
    // nearbyint honours the default round-to-nearest-even mode.
    const double v = std::nearbyint((std::clamp(src[i], -1.0, 1.0) + 1.0) * 127.5);
    out.data[i] = static_cast<unsigned char>(v);
  }
  return out;
}

RgbImage resize(const RgbImage& image, int height, int width) {
  if (image.rows == height && image.cols == width) return image.clone();
  const bool shrinking = height * width < image.rows * image.cols;
  RgbImage out;
  cv::resize(image, out, cv::Size(width, height), 0, 0,
             shrinking ? cv::INTER_AREA : cv::INTER_LINEAR);
  return out;
}

RgbImage resize_to_height(const RgbImage& image, int height) {
  const double scale = static_cast<double>(height) / image.rows;
  const int width = std::max(1, static_cast<int>(std::lround(image.cols * scale)));
  return resize(image, height, width);
}

}  // namespace stgen::io

namespace stgen::io {

int batch_width(const std::vector<int>& widths) {
  if (widths.empty()) throw EmptyBatch("cannot size an empty batch");
  long long sum = 0;
  for (int w : widths) sum += w;
  const auto n = static_cast<long long>(widths.size());
  // ceil(sum / n) rounded up to a multiple of 4, i.e. ceil(sum / (4n)) * 4
  return static_cast<int>((sum + 4 * n - 1) / (4 * n) * 4);
}

torch::Tensor resize_tensor(const torch::Tensor& chw, int height, int width) {
  if (chw.size(1) == height && chw.size(2) == width) return chw;
  namespace F = torch::nn::functional;
  const bool shrink = width < chw.size(2) || height < chw.size(1);
  auto opts = F::InterpolateFuncOptions().size(std::vector<std::int64_t>{height, width});
  if (shrink) {
    opts.mode(torch::kArea);
  } else {
    opts.mode(torch::kBilinear).align_corners(false);
  }
  return F::interpolate(chw.unsqueeze(0), opts).squeeze(0);
}

}  // namespace stgen::io
