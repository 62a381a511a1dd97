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

#include <vector>

#include <torch/torch.h>

#include "stgen/attention/modules.hpp"
#include "stgen/networks/config.hpp"

namespace stgen::networks {

/// One (gamma, beta) pair per AdaIN layer, each [B, C]. Decoder order:
/// residual block 1, residual block 2, upsample 1, upsample 2.
struct AdaINParams {
  std::vector<torch::Tensor> gamma;
  std::vector<torch::Tensor> beta;
  std::size_t size() const { return gamma.size(); }
};

struct ContentFeatures {
  torch::Tensor low;   // after the first downsampling, 2b x 32 x W/2
  torch::Tensor high;  // after the second downsampling, 4b x 16 x W/4
  torch::Tensor top;   // after the residual blocks, 4b x 16 x W/4
};

/// gamma * (x - mean) / sqrt(var + eps) + beta per sample and channel, with
/// spatial statistics (biased variance). gamma, beta: [B, C].
torch::Tensor adain(const torch::Tensor& x, const torch::Tensor& gamma, const torch::Tensor& beta,
                    double eps = kNormEps);

/// conv3x3-IN-ReLU-conv3x3-IN plus identity.
class ResidualBlockImpl : public torch::nn::Module {
 public:
  explicit ResidualBlockImpl(std::int64_t channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
  torch::nn::InstanceNorm2d norm1{nullptr}, norm2{nullptr};
};
TORCH_MODULE(ResidualBlock);

/// Residual block whose two normalizations are AdaIN with a shared pair.
class AdaINResidualBlockImpl : public torch::nn::Module {
 public:
  explicit AdaINResidualBlockImpl(std::int64_t channels);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& gamma,
                        const torch::Tensor& beta);

 private:
  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
};
TORCH_MODULE(AdaINResidualBlock);

/// Eight 3x3 conv-BN-ReLU layers with five 2x2 max pools, global average
/// pooling and a linear projection to a 128-d style vector. Convolutions
/// wrap around horizontally so a width-tiled input has identical statistics.
class StyleEncoderImpl : public torch::nn::Module {
 public:
  explicit StyleEncoderImpl(std::int64_t base_channels);
  /// x: [B, 3, 64, W]. Throws ShapeError.
  torch::Tensor forward(const torch::Tensor& x);

 private:
  std::vector<torch::nn::Conv2d> convs_;
  std::vector<torch::nn::BatchNorm2d> norms_;
  torch::nn::Linear fc{nullptr};
};
TORCH_MODULE(StyleEncoder);

class ContentEncoderImpl : public torch::nn::Module {
 public:
  ContentEncoderImpl(std::int64_t base_channels, attention::Backend backend);
  /// x: [B, 3, 64, W], W a multiple of 4. Throws ShapeError.
  ContentFeatures forward(const torch::Tensor& x);

 private:
  attention::DeformableConvLayer stem{nullptr};
  torch::nn::Conv2d down1{nullptr}, down2{nullptr};
  torch::nn::InstanceNorm2d norm0{nullptr}, norm1{nullptr}, norm2{nullptr};
  ResidualBlock res1{nullptr}, res2{nullptr};
};
TORCH_MODULE(ContentEncoder);

/// Linear-ReLU-linear trunk, then one linear head per AdaIN layer producing
/// (gamma, beta); gamma is offset by 1 so a fresh network is near identity.
class MappingNetworkImpl : public torch::nn::Module {
 public:
  MappingNetworkImpl(std::int64_t hidden, std::vector<std::int64_t> channels);
  AdaINParams forward(const torch::Tensor& style);
  const std::vector<std::int64_t>& channels() const { return channels_; }

 private:
  torch::nn::Linear fc1{nullptr}, fc2{nullptr};
  std::vector<torch::nn::Linear> heads_;
  std::vector<std::int64_t> channels_;
};
TORCH_MODULE(MappingNetwork);

/// Two AdaIN residual blocks, two (upsample, conv5x5, AdaIN, ReLU) stages
/// and a conv7x7-tanh output. Attention outputs are concatenated onto the
/// decoder features entering each upsampling stage.
class DecoderImpl : public torch::nn::Module {
 public:
  DecoderImpl(std::int64_t base_channels, bool low_attention);

  torch::Tensor forward(const ContentFeatures& content, const AdaINParams& params,
                        attention::IntegratedAttention& attention);

 private:
  AdaINResidualBlock res1{nullptr}, res2{nullptr};
  torch::nn::Conv2d up1{nullptr}, up2{nullptr}, out{nullptr};
};
TORCH_MODULE(Decoder);

class GeneratorImpl : public torch::nn::Module {
 public:
  explicit GeneratorImpl(const GeneratorConfig& config);

  torch::Tensor encode_style(const torch::Tensor& style_image);
  AdaINParams map_style(const torch::Tensor& style);
  ContentFeatures encode_content(const torch::Tensor& content_image);
  torch::Tensor decode(const ContentFeatures& content, const AdaINParams& params);

  /// Output has the content image's shape, values in (-1, 1).
  torch::Tensor forward(const torch::Tensor& style_image, const torch::Tensor& content_image);

  const GeneratorConfig& config() const { return config_; }

  /// Parameter groups for optimizer routing.
  std::vector<torch::Tensor> style_parameters() const;
  std::vector<torch::Tensor> mapping_parameters() const;
  std::vector<torch::Tensor> content_parameters() const;  // encoder, decoder, attention

  StyleEncoder style_encoder{nullptr};
  ContentEncoder content_encoder{nullptr};
  MappingNetwork mapping{nullptr};
  Decoder decoder{nullptr};
  attention::IntegratedAttention attention{nullptr};

 private:
  GeneratorConfig config_;
};
TORCH_MODULE(Generator);

/// Five stride-2 conv4x4-LeakyReLU stages and one conv head per domain; the
/// score of a sample is the spatial mean of its domain's head.
class DiscriminatorImpl : public torch::nn::Module {
 public:
  DiscriminatorImpl(std::int64_t base_channels, std::int64_t num_domains);

  /// x: [B, 3, 64, W], y: [B] int64. Returns [B]. Throws InvalidDomain.
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& y);

  std::int64_t num_domains() const { return static_cast<std::int64_t>(heads_->size()); }
  torch::nn::ModuleList& heads() { return heads_; }

 private:
  torch::nn::Sequential trunk{nullptr};
  torch::nn::ModuleList heads_{nullptr};
};
TORCH_MODULE(Discriminator);

}  // namespace stgen::networks
