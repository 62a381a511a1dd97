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

#include "stgen/networks/generator.hpp"

#include <sstream>

#include "stgen/common/errors.hpp"
#include "stgen/common/init.hpp"

namespace stgen::networks {

namespace F = torch::nn::functional;

namespace {

torch::nn::Conv2d make_conv(std::int64_t in, std::int64_t out, std::int64_t kernel,
                            std::int64_t stride, torch::ExpandingArray<2> padding) {
  torch::nn::Conv2d conv(
      torch::nn::Conv2dOptions(in, out, kernel).stride(stride).padding(padding));
  init::conv(conv);
  return conv;
}

torch::nn::Conv2d make_conv(std::int64_t in, std::int64_t out, std::int64_t kernel,
                            std::int64_t stride = 1) {
  return make_conv(in, out, kernel, stride, torch::ExpandingArray<2>(kernel / 2));
}

torch::nn::InstanceNorm2d make_in(std::int64_t channels) {
  return torch::nn::InstanceNorm2d(
      torch::nn::InstanceNorm2dOptions(channels).affine(true).eps(kNormEps));
}

void check_image(const torch::Tensor& x, const char* who, bool width_multiple_of_4) {
  std::ostringstream os;
  if (x.dim() != 4 || x.size(1) != 3 || x.size(2) != kImageHeight) {
    os << who << ": expected [B, 3, " << kImageHeight << ", W], got " << x.sizes();
    throw ShapeError(os.str());
  }
  if (width_multiple_of_4 && (x.size(3) % 4 != 0 || x.size(3) < 8)) {
    os << who << ": width must be a multiple of 4 and at least 8, got " << x.size(3);
    throw ShapeError(os.str());
  }
}

/// Circular padding by one column on each side.
torch::Tensor wrap_columns(const torch::Tensor& x) {
  const auto w = x.size(3);
  return torch::cat({x.narrow(3, w - 1, 1), x, x.narrow(3, 0, 1)}, 3);
}

}  // namespace

torch::Tensor adain(const torch::Tensor& x, const torch::Tensor& gamma, const torch::Tensor& beta,
                    double eps) {
  if (x.dim() != 4 || gamma.sizes() != beta.sizes() || gamma.dim() != 2 ||
      gamma.size(0) != x.size(0) || gamma.size(1) != x.size(1)) {
    std::ostringstream os;
    os << "adain: features " << x.sizes() << " vs gamma " << gamma.sizes() << ", beta "
       << beta.sizes();
    throw ShapeMismatch(os.str());
  }
  const auto mean = x.mean({2, 3}, true);
  const auto var = x.var({2, 3}, /*unbiased=*/false, /*keepdim=*/true);
  const auto normalized = (x - mean) * torch::rsqrt(var + eps);
  return normalized * gamma.unsqueeze(-1).unsqueeze(-1) + beta.unsqueeze(-1).unsqueeze(-1);
}

// ---------------------------------------------------------------------------

ResidualBlockImpl::ResidualBlockImpl(std::int64_t channels) {
  conv1 = register_module("conv1", make_conv(channels, channels, 3));
  norm1 = register_module("norm1", make_in(channels));
  conv2 = register_module("conv2", make_conv(channels, channels, 3));
  norm2 = register_module("norm2", make_in(channels));
}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(norm1(conv1(x)));
  return x + norm2(conv2(h));
}

AdaINResidualBlockImpl::AdaINResidualBlockImpl(std::int64_t channels) {
  conv1 = register_module("conv1", make_conv(channels, channels, 3));
  conv2 = register_module("conv2", make_conv(channels, channels, 3));
}

torch::Tensor AdaINResidualBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& gamma,
                                              const torch::Tensor& beta) {
  auto h = torch::relu(adain(conv1(x), gamma, beta));
  return x + adain(conv2(h), gamma, beta);
}

// ---------------------------------------------------------------------------

StyleEncoderImpl::StyleEncoderImpl(std::int64_t base_channels) {
  const std::int64_t widths[] = {1, 2, 4, 4, 8, 8, 8, 8};
  std::int64_t in = 3;
  for (int i = 0; i < 8; ++i) {
    const auto out = widths[i] * base_channels;
    convs_.push_back(register_module("conv" + std::to_string(i + 1),
                                     make_conv(in, out, 3, 1, torch::ExpandingArray<2>({1, 0}))));
    norms_.push_back(register_module(
        "norm" + std::to_string(i + 1),
        torch::nn::BatchNorm2d(torch::nn::BatchNorm2dOptions(out).eps(kNormEps))));
    in = out;
  }
  fc = register_module("fc", torch::nn::Linear(in, kStyleDim));
  init::linear(fc);
}

torch::Tensor StyleEncoderImpl::forward(const torch::Tensor& x) {
  check_image(x, "encode_style", false);
  auto h = x;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    h = torch::relu(norms_[i](convs_[i](wrap_columns(h))));
    // pools after layers 1, 2, 4, 6, 8
    if (i == 0 || i % 2 == 1) {
      h = F::max_pool2d(h, F::MaxPool2dFuncOptions(2).stride(2).ceil_mode(true));
    }
  }
  return fc(h.mean({2, 3}));
}

// ---------------------------------------------------------------------------

ContentEncoderImpl::ContentEncoderImpl(std::int64_t b, attention::Backend backend) {
  stem = register_module("stem", attention::DeformableConvLayer(3, b, 7, 1, 3, backend));
  norm0 = register_module("norm0", make_in(b));
  down1 = register_module("down1", make_conv(b, 2 * b, 4, 2, torch::ExpandingArray<2>(1)));
  norm1 = register_module("norm1", make_in(2 * b));
  down2 = register_module("down2", make_conv(2 * b, 4 * b, 4, 2, torch::ExpandingArray<2>(1)));
  norm2 = register_module("norm2", make_in(4 * b));
  res1 = register_module("res1", ResidualBlock(4 * b));
  res2 = register_module("res2", ResidualBlock(4 * b));
}

ContentFeatures ContentEncoderImpl::forward(const torch::Tensor& x) {
  check_image(x, "encode_content", true);
  auto h = torch::relu(norm0(stem(x)));
  ContentFeatures f;
  f.low = torch::relu(norm1(down1(h)));
  f.high = torch::relu(norm2(down2(f.low)));
  f.top = res2(res1(f.high));
  return f;
}

// ---------------------------------------------------------------------------

MappingNetworkImpl::MappingNetworkImpl(std::int64_t hidden, std::vector<std::int64_t> channels)
    : channels_(std::move(channels)) {
  fc1 = register_module("fc1", torch::nn::Linear(kStyleDim, hidden));
  fc2 = register_module("fc2", torch::nn::Linear(hidden, hidden));
  init::linear(fc1);
  init::linear(fc2);
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    heads_.push_back(register_module("head" + std::to_string(i),
                                     torch::nn::Linear(hidden, 2 * channels_[i])));
    init::linear(heads_.back());
  }
}

AdaINParams MappingNetworkImpl::forward(const torch::Tensor& style) {
  if (style.dim() != 2 || style.size(1) != kStyleDim) {
    std::ostringstream os;
    os << "map_style: expected [B, " << kStyleDim << "], got " << style.sizes();
    throw ShapeError(os.str());
  }
  const auto h = fc2(torch::relu(fc1(style)));
  AdaINParams params;
  for (std::size_t i = 0; i < heads_.size(); ++i) {
    const auto out = heads_[i](h);
    params.gamma.push_back(1.0 + out.narrow(1, 0, channels_[i]));
    params.beta.push_back(out.narrow(1, channels_[i], channels_[i]));
  }
  return params;
}

// ---------------------------------------------------------------------------

DecoderImpl::DecoderImpl(std::int64_t b, bool low_attention) {
  res1 = register_module("res1", AdaINResidualBlock(4 * b));
  res2 = register_module("res2", AdaINResidualBlock(4 * b));
  up1 = register_module("up1", make_conv(8 * b, 2 * b, 5));
  up2 = register_module("up2", make_conv(low_attention ? 4 * b : 2 * b, b, 5));
  out = register_module("out", make_conv(b, 3, 7));
}

torch::Tensor DecoderImpl::forward(const ContentFeatures& content, const AdaINParams& params,
                                   attention::IntegratedAttention& attention) {
  auto up = [](const torch::Tensor& x) {
    return F::interpolate(x, F::InterpolateFuncOptions()
                                 .scale_factor(std::vector<double>{2.0, 2.0})
                                 .mode(torch::kNearest));
  };
  auto h = res1(content.top, params.gamma[0], params.beta[0]);
  h = res2(h, params.gamma[1], params.beta[1]);

  const auto high = attention->attend_high(content.high, h);
  h = torch::relu(adain(up1(up(torch::cat({h, high}, 1))), params.gamma[2], params.beta[2]));

  if (auto low = attention->attend_low(content.low, h)) h = torch::cat({h, *low}, 1);
  h = torch::relu(adain(up2(up(h)), params.gamma[3], params.beta[3]));
  return torch::tanh(out(h));
}

// ---------------------------------------------------------------------------

GeneratorImpl::GeneratorImpl(const GeneratorConfig& config) : config_(config) {
  config_.validate();
  const auto b = config_.base_channels;
  style_encoder = register_module("style_encoder", StyleEncoder(b));
  content_encoder = register_module("content_encoder", ContentEncoder(b, config_.backend));
  mapping = register_module(
      "mapping", MappingNetwork(config_.mapping_hidden, std::vector<std::int64_t>{4 * b, 4 * b, 2 * b, b}));
  decoder = register_module("decoder", Decoder(b, config_.global_attention_low));
  attention = register_module(
      "attention", attention::IntegratedAttention(2 * b, 4 * b, config_.attention_options()));
}

torch::Tensor GeneratorImpl::encode_style(const torch::Tensor& style_image) {
  return style_encoder(style_image);
}

AdaINParams GeneratorImpl::map_style(const torch::Tensor& style) { return mapping(style); }

ContentFeatures GeneratorImpl::encode_content(const torch::Tensor& content_image) {
  return content_encoder(content_image);
}

torch::Tensor GeneratorImpl::decode(const ContentFeatures& content, const AdaINParams& params) {
  return decoder->forward(content, params, attention);
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& style_image,
                                     const torch::Tensor& content_image) {
  if (style_image.dim() == 4 && content_image.dim() == 4 &&
      style_image.size(0) != content_image.size(0)) {
    throw ShapeError("generate: style and content batch sizes differ");
  }
  return decode(encode_content(content_image), map_style(encode_style(style_image)));
}

std::vector<torch::Tensor> GeneratorImpl::style_parameters() const {
  return style_encoder->parameters();
}

std::vector<torch::Tensor> GeneratorImpl::mapping_parameters() const {
  return mapping->parameters();
}

std::vector<torch::Tensor> GeneratorImpl::content_parameters() const {
  auto params = content_encoder->parameters();
  for (const auto* m : {static_cast<const torch::nn::Module*>(decoder.get()),
                        static_cast<const torch::nn::Module*>(attention.get())}) {
    const auto more = m->parameters();
    params.insert(params.end(), more.begin(), more.end());
  }
  return params;
}

// ---------------------------------------------------------------------------

DiscriminatorImpl::DiscriminatorImpl(std::int64_t b, std::int64_t num_domains) {
  trunk = torch::nn::Sequential();
  const std::int64_t widths[] = {1, 2, 4, 8, 8};
  std::int64_t in = 3;
  for (auto w : widths) {
    trunk->push_back(make_conv(in, w * b, 4, 2, torch::ExpandingArray<2>(1)));
    trunk->push_back(torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2)));
    in = w * b;
  }
  register_module("trunk", trunk);
  heads_ = torch::nn::ModuleList();
  for (std::int64_t d = 0; d < num_domains; ++d) heads_->push_back(make_conv(in, 1, 3));
  register_module("heads", heads_);
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& x, const torch::Tensor& y) {
  check_image(x, "discriminate", false);
  if (x.size(3) < 32) throw ShapeError("discriminate: width must be at least 32");
  if (y.dim() != 1 || y.size(0) != x.size(0)) {
    throw ShapeMismatch("discriminate: one domain label per sample required");
  }
  const auto labels = y.to(torch::kInt64);
  if (labels.numel() > 0 &&
      (labels.min().item<std::int64_t>() < 0 ||
       labels.max().item<std::int64_t>() >= num_domains())) {
    throw InvalidDomain("domain label outside [0, " + std::to_string(num_domains()) + ")");
  }
  const auto h = trunk->forward(x);
  std::vector<torch::Tensor> scores;
  for (const auto& head : *heads_) {
    scores.push_back(head->as<torch::nn::Conv2d>()->forward(h).mean({1, 2, 3}));
  }
  return torch::stack(scores, 1).gather(1, labels.unsqueeze(1)).squeeze(1);
}

}  // namespace stgen::networks
