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

#include <torch/torch.h>

#include "stgen/attention/kernels.hpp"

namespace stgen::attention {

using kernels::Backend;

/// Samples `map` [B, C, H, W] at `coords` [B, Ho, Wo, 2] holding (y, x)
/// pixel coordinates. Zero padding outside the map. Differentiable w.r.t.
/// map and coords. Returns [B, C, Ho, Wo].
torch::Tensor bilinear_sample(const torch::Tensor& map, const torch::Tensor& coords,
                              Backend backend = Backend::kOpenMP);

struct DeformConvOptions {
  std::int64_t stride = 1;
  std::int64_t padding = 0;
  Backend backend = Backend::kOpenMP;
};

/// Convolution whose taps read `input` at the regular grid position plus a
/// learned displacement: out[q] = bias + sum_p W_p * interp(input, q + p + offset_p(q)).
/// input [B, Ci, H, W], offsets [B, 2*kh*kw, Ho, Wo] ((dy, dx) per tap),
/// weight [Co, Ci, kh, kw], bias [Co] or undefined.
torch::Tensor deform_conv2d(const torch::Tensor& input, const torch::Tensor& offsets,
                            const torch::Tensor& weight, const torch::Tensor& bias,
                            const DeformConvOptions& options = {});

/// s x s zero-padded neighbourhoods of x [B, C, H, W] -> [B, H, W, s, s, C].
torch::Tensor extract_patches(const torch::Tensor& x, std::int64_t size,
                              Backend backend = Backend::kOpenMP);

/// Per-position weighted window sum: weights [B, H, W, s, s, C], x [B, C, H, W]
/// -> [B, C, H, W].
torch::Tensor window_aggregate(const torch::Tensor& weights, const torch::Tensor& x,
                               Backend backend = Backend::kOpenMP);

}  // namespace stgen::attention
