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

#include "stgen/attention/modules.hpp"

#include <algorithm>

#include "stgen/common/errors.hpp"
#include "stgen/common/init.hpp"
#include "stgen/common/trace.hpp"

namespace stgen::attention {

namespace {

void require_same_spatial(const torch::Tensor& a, const torch::Tensor& b, const char* where) {
  if (a.dim() != 4 || b.dim() != 4 || a.size(0) != b.size(0) || a.size(2) != b.size(2) ||
      a.size(3) != b.size(3)) {
    std::ostringstream os;
    os << where << ": spatial mismatch " << a.sizes() << " vs " << b.sizes();
    throw ShapeMismatch(os.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

OffsetPredictorImpl::OffsetPredictorImpl(std::int64_t query_channels, std::int64_t key_channels,
                                         std::int64_t taps, std::int64_t kernel) {
  conv = register_module(
      "conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(query_channels + key_channels, 2 * taps,
                                                         kernel)
                                    .padding(kernel / 2)));
  init::zero(conv);
}

torch::Tensor OffsetPredictorImpl::forward(const torch::Tensor& query, const torch::Tensor& key) {
  require_same_spatial(query, key, "predict_offsets");
  return conv->forward(torch::cat({query, key}, 1));
}

// ---------------------------------------------------------------------------

DeformConv2dImpl::DeformConv2dImpl(std::int64_t in_channels, std::int64_t out_channels,
                                   std::int64_t kernel, std::int64_t stride,
                                   std::int64_t padding, bool with_bias, Backend backend)
    : kernel_(kernel), stride_(stride), padding_(padding), backend_(backend) {
  weight = register_parameter("weight", torch::empty({out_channels, in_channels, kernel, kernel}));
  {
    torch::NoGradGuard no_grad;
    torch::nn::init::kaiming_normal_(weight, 0.0, torch::kFanIn, torch::kReLU);
  }
  if (with_bias) bias = register_parameter("bias", torch::zeros({out_channels}));
}

torch::Tensor DeformConv2dImpl::forward(const torch::Tensor& input, const torch::Tensor& offsets) {
  return deform_conv2d(input, offsets, weight, bias, {stride_, padding_, backend_});
}

void DeformConv2dImpl::reset_to_identity() {
  TORCH_CHECK(weight.size(0) == weight.size(1) && kernel_ % 2 == 1,
              "identity kernel needs in == out and an odd kernel");
  torch::NoGradGuard no_grad;
  weight.zero_();
  const auto c = kernel_ / 2;
  for (std::int64_t i = 0; i < weight.size(0); ++i) weight[i][i][c][c] = 1.0;
  if (bias.defined()) bias.zero_();
}

// ---------------------------------------------------------------------------

DeformableConvLayerImpl::DeformableConvLayerImpl(std::int64_t in_channels,
                                                 std::int64_t out_channels, std::int64_t kernel,
                                                 std::int64_t stride, std::int64_t padding,
                                                 Backend backend) {
  offset_conv = register_module(
      "offset_conv",
      torch::nn::Conv2d(torch::nn::Conv2dOptions(in_channels, 2 * kernel * kernel, kernel)
                            .stride(stride)
                            .padding(padding)));
  init::zero(offset_conv);
  deform = register_module(
      "deform", DeformConv2d(in_channels, out_channels, kernel, stride, padding, true, backend));
}

torch::Tensor DeformableConvLayerImpl::forward(const torch::Tensor& input) {
  return deform->forward(input, offset_conv->forward(input));
}

// ---------------------------------------------------------------------------

GlobalAttentionBlockImpl::GlobalAttentionBlockImpl(std::int64_t channels,
                                                   std::int64_t key_channels, std::int64_t depth,
                                                   Backend backend) {
  TORCH_CHECK(depth >= 1, "dense_depth must be at least 1");
  for (std::int64_t t = 0; t < depth; ++t) {
    predictors_.push_back(register_module("offsets" + std::to_string(t),
                                          OffsetPredictor(channels * (t + 1), key_channels)));
    deforms_.push_back(register_module("deform" + std::to_string(t),
                                       DeformConv2d(channels, channels, 3, 1, 1, true, backend)));
  }
}

torch::Tensor GlobalAttentionBlockImpl::forward(const torch::Tensor& f_cnt,
                                                const torch::Tensor& f_dec) {
  require_same_spatial(f_cnt, f_dec, "global_attention_block");
  std::vector<torch::Tensor> dense{f_cnt};
  torch::Tensor value = f_cnt;
  for (std::size_t t = 0; t < predictors_.size(); ++t) {
    const auto query = dense.size() == 1 ? f_cnt : torch::cat(dense, 1);
    const auto offsets = predictors_[t]->forward(query, f_dec);
    value = deforms_[t]->forward(value, offsets);
    dense.push_back(value);
  }
  return value;
}

// ---------------------------------------------------------------------------

LocalAttentionImpl::LocalAttentionImpl(std::int64_t channels, std::int64_t patch_size,
                                       std::int64_t hidden, bool normalize, Backend backend)
    : channels_(channels), patch_size_(patch_size), normalize_(normalize), backend_(backend) {
  if (patch_size < 1 || patch_size % 2 == 0) {
    throw InvalidPatchSize("local attention patch size must be odd, got " +
                           std::to_string(patch_size));
  }
  if (hidden <= 0) hidden = channels;
  const auto window = patch_size * patch_size * channels;
  fc1 = register_module("fc1", torch::nn::Linear(window + channels, hidden));
  fc2 = register_module("fc2", torch::nn::Linear(hidden, window));
  init::linear(fc1);
  init::linear(fc2);
}

torch::Tensor LocalAttentionImpl::window_weights(const torch::Tensor& query,
                                                 const torch::Tensor& key) {
  require_same_spatial(query, key, "local_attention");
  if (query.size(1) != channels_ || key.size(1) != channels_) {
    throw ShapeMismatch("local_attention: expected " + std::to_string(channels_) + " channels");
  }
  const auto h = key.size(2), w = key.size(3);
  if (patch_size_ > 2 * std::min(h, w) - 1) {
    throw InvalidPatchSize("patch size " + std::to_string(patch_size_) +
                           " exceeds 2*min(H,W)-1 for a " + std::to_string(h) + "x" +
                           std::to_string(w) + " map");
  }
  const auto b = key.size(0), s = patch_size_;
  const auto patches = extract_patches(key, s, backend_).view({b, h, w, s * s * channels_});
  const auto q = query.permute({0, 2, 3, 1});
  auto hidden = torch::leaky_relu(fc1->forward(torch::cat({patches, q}, 3)), 0.2);
  auto weights = fc2->forward(hidden).view({b, h, w, s, s, channels_});
  if (normalize_) {
    weights = weights.view({b, h, w, s * s, channels_}).softmax(3).view({b, h, w, s, s, channels_});
  }
  return weights;
}

torch::Tensor LocalAttentionImpl::forward(const torch::Tensor& query, const torch::Tensor& key) {
  return window_aggregate(window_weights(query, key), key, backend_);
}

// ---------------------------------------------------------------------------

IntegratedAttentionImpl::IntegratedAttentionImpl(std::int64_t low_channels,
                                                 std::int64_t high_channels,
                                                 const AttentionOptions& options)
    : options_(options) {
  high_offsets = register_module("high_offsets", OffsetPredictor(high_channels, high_channels));
  high_deform = register_module(
      "high_deform", DeformConv2d(high_channels, high_channels, 3, 1, 1, true, options.backend));
  if (options.local_attention_high) {
    local = register_module("local", LocalAttention(high_channels, options.patch_size,
                                                    options.local_hidden, options.normalize_local,
                                                    options.backend));
  }
  if (options.global_attention_low) {
    low = register_module("low", GlobalAttentionBlock(low_channels, low_channels,
                                                      options.dense_depth, options.backend));
  }
}

torch::Tensor IntegratedAttentionImpl::attend_high(const torch::Tensor& f_cnt_high,
                                                   const torch::Tensor& f_dec_high) {
  trace_event("global_attention_high");
  const auto deformed =
      high_deform->forward(f_cnt_high, high_offsets->forward(f_cnt_high, f_dec_high));
  if (!local) return deformed;
  trace_event("local_attention_high");
  return local->forward(deformed, f_dec_high);
}

std::optional<torch::Tensor> IntegratedAttentionImpl::attend_low(const torch::Tensor& f_cnt_low,
                                                                 const torch::Tensor& f_dec_low) {
  if (!low) return std::nullopt;
  trace_event("global_attention_low");
  return low->forward(f_cnt_low, f_dec_low);
}

IntegratedAttentionOutput IntegratedAttentionImpl::forward(const torch::Tensor& f_cnt_low,
                                                           const torch::Tensor& f_cnt_high,
                                                           const torch::Tensor& f_dec_low,
                                                           const torch::Tensor& f_dec_high) {
  return {attend_low(f_cnt_low, f_dec_low), attend_high(f_cnt_high, f_dec_high)};
}

}  // namespace stgen::attention
