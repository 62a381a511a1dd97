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

#include <optional>

#include <torch/torch.h>

#include "stgen/attention/ops.hpp"

namespace stgen::attention {

/// Projects concat(query, key) to one (dy, dx) pair per kernel tap with a
/// single regular convolution. Zero-initialized, so a fresh predictor
/// yields all-zero offsets and the deformable layer starts as a plain conv.
class OffsetPredictorImpl : public torch::nn::Module {
 public:
  OffsetPredictorImpl(std::int64_t query_channels, std::int64_t key_channels,
                      std::int64_t taps = 9, std::int64_t kernel = 3);

  /// Throws ShapeMismatch when query and key differ spatially.
  torch::Tensor forward(const torch::Tensor& query, const torch::Tensor& key);

  torch::nn::Conv2d conv{nullptr};
};
TORCH_MODULE(OffsetPredictor);

/// Learnable-weight deformable convolution; offsets come from the caller.
class DeformConv2dImpl : public torch::nn::Module {
 public:
  DeformConv2dImpl(std::int64_t in_channels, std::int64_t out_channels, std::int64_t kernel,
                   std::int64_t stride = 1, std::int64_t padding = 0, bool bias = true,
                   Backend backend = Backend::kOpenMP);

  torch::Tensor forward(const torch::Tensor& input, const torch::Tensor& offsets);

  /// Centre tap identity, everything else zero (requires in == out, odd kernel).
  void reset_to_identity();

  std::int64_t taps() const { return kernel_ * kernel_; }
  std::int64_t stride() const { return stride_; }
  std::int64_t padding() const { return padding_; }

  torch::Tensor weight;
  torch::Tensor bias;

 private:
  std::int64_t kernel_, stride_, padding_;
  Backend backend_;
};
TORCH_MODULE(DeformConv2d);

/// Deformable convolution whose offsets are predicted from its own input
/// by a zero-initialized convolution of the same geometry.
class DeformableConvLayerImpl : public torch::nn::Module {
 public:
  DeformableConvLayerImpl(std::int64_t in_channels, std::int64_t out_channels,
                          std::int64_t kernel, std::int64_t stride, std::int64_t padding,
                          Backend backend = Backend::kOpenMP);

  torch::Tensor forward(const torch::Tensor& input);

  torch::nn::Conv2d offset_conv{nullptr};
  DeformConv2d deform{nullptr};
};
TORCH_MODULE(DeformableConvLayer);

/// Densely connected chain of offset-driven deformable convolutions. Stage t
/// predicts offsets from concat(f_cnt, out_1..out_{t-1}) against the decoder
/// key and deforms the previous stage's output (f_cnt for the first stage).
class GlobalAttentionBlockImpl : public torch::nn::Module {
 public:
  GlobalAttentionBlockImpl(std::int64_t channels, std::int64_t key_channels, std::int64_t depth,
                           Backend backend = Backend::kOpenMP);

  torch::Tensor forward(const torch::Tensor& f_cnt, const torch::Tensor& f_dec);

  std::int64_t depth() const { return static_cast<std::int64_t>(predictors_.size()); }
  OffsetPredictor& predictor(std::size_t stage) { return predictors_[stage]; }
  DeformConv2d& deform(std::size_t stage) { return deforms_[stage]; }

 private:
  std::vector<OffsetPredictor> predictors_;
  std::vector<DeformConv2d> deforms_;
};
TORCH_MODULE(GlobalAttentionBlock);

/// Patch-wise attention: at each (i, j) a two-layer network (linear, leaky
/// ReLU, linear) maps concat(flatten(key patch), query vector) to an
/// s x s x c weight window, and the output is the window-weighted sum of the
/// key patch per channel.
class LocalAttentionImpl : public torch::nn::Module {
 public:
  /// `hidden` <= 0 uses `channels`. Throws InvalidPatchSize for even s.
  LocalAttentionImpl(std::int64_t channels, std::int64_t patch_size, std::int64_t hidden = 0,
                     bool normalize = false, Backend backend = Backend::kOpenMP);

  /// Throws ShapeMismatch on query/key disagreement and InvalidPatchSize if
  /// s exceeds 2 * min(H, W) - 1.
  torch::Tensor forward(const torch::Tensor& query, const torch::Tensor& key);

  /// The raw (or softmax-normalized) window weights, [B, H, W, s, s, C].
  torch::Tensor window_weights(const torch::Tensor& query, const torch::Tensor& key);

  std::int64_t patch_size() const { return patch_size_; }

  torch::nn::Linear fc1{nullptr};
  torch::nn::Linear fc2{nullptr};

 private:
  std::int64_t channels_, patch_size_;
  bool normalize_;
  Backend backend_;
};
TORCH_MODULE(LocalAttention);

struct AttentionOptions {
  std::int64_t patch_size = 3;
  std::int64_t dense_depth = 3;
  std::int64_t local_hidden = 0;  // 0: same as the high-level channel count
  bool normalize_local = false;
  bool global_attention_low = true;  // "global attention 3" branch
  bool local_attention_high = true;  // "local attention 1" branch
  Backend backend = Backend::kOpenMP;
};

struct IntegratedAttentionOutput {
  std::optional<torch::Tensor> low;  // absent when the low branch is disabled
  torch::Tensor high;
};

/// High level: deformable global attention followed by local attention.
/// Low level: densely connected global attention block.
class IntegratedAttentionImpl : public torch::nn::Module {
 public:
  IntegratedAttentionImpl(std::int64_t low_channels, std::int64_t high_channels,
                          const AttentionOptions& options);

  torch::Tensor attend_high(const torch::Tensor& f_cnt_high, const torch::Tensor& f_dec_high);
  std::optional<torch::Tensor> attend_low(const torch::Tensor& f_cnt_low,
                                          const torch::Tensor& f_dec_low);

  IntegratedAttentionOutput forward(const torch::Tensor& f_cnt_low,
                                    const torch::Tensor& f_cnt_high,
                                    const torch::Tensor& f_dec_low,
                                    const torch::Tensor& f_dec_high);

  const AttentionOptions& options() const { return options_; }

  OffsetPredictor high_offsets{nullptr};
  DeformConv2d high_deform{nullptr};
  LocalAttention local{nullptr};
  GlobalAttentionBlock low{nullptr};

 private:
  AttentionOptions options_;
};
TORCH_MODULE(IntegratedAttention);

}  // namespace stgen::attention
