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

// Raw CPU kernels behind the attention ops. Every kernel exists twice: a
// serial reference formulation (direct loops, used as the ground truth in
// tests and benchmarks) and an OpenMP formulation that the autograd ops use
// by default. Buffers are dense row-major; gradient outputs are accumulated
// into (callers zero them first).

#include <cmath>
#include <cstdint>
#include <vector>

namespace stgen::kernels {

enum class Backend { kReference, kOpenMP };

const char* backend_name(Backend backend);

/// Bilinear interpolation of one H x W plane at (y, x); samples outside the
/// plane read as zero.
template <typename T>
inline T bilinear(const T* plane, std::int64_t h, std::int64_t w, T y, T x) {
  if (!(y > T(-1)) || !(y < T(h)) || !(x > T(-1)) || !(x < T(w))) return T(0);
  const T fy = std::floor(y);
  const T fx = std::floor(x);
  const auto y0 = static_cast<std::int64_t>(fy);
  const auto x0 = static_cast<std::int64_t>(fx);
  const T ly = y - fy, lx = x - fx;
  const T hy = T(1) - ly, hx = T(1) - lx;
  const bool top = y0 >= 0, bottom = y0 + 1 < h, left = x0 >= 0, right = x0 + 1 < w;
  T v = T(0);
  if (top && left) v += hy * hx * plane[y0 * w + x0];
  if (top && right) v += hy * lx * plane[y0 * w + x0 + 1];
  if (bottom && left) v += ly * hx * plane[(y0 + 1) * w + x0];
  if (bottom && right) v += ly * lx * plane[(y0 + 1) * w + x0 + 1];
  return v;
}

/// d bilinear / d(y, x).
template <typename T>
inline void bilinear_coord_grad(const T* plane, std::int64_t h, std::int64_t w, T y, T x,
                                T& dy, T& dx) {
  dy = T(0);
  dx = T(0);
  if (!(y > T(-1)) || !(y < T(h)) || !(x > T(-1)) || !(x < T(w))) return;
  const T fy = std::floor(y);
  const T fx = std::floor(x);
  const auto y0 = static_cast<std::int64_t>(fy);
  const auto x0 = static_cast<std::int64_t>(fx);
  const T ly = y - fy, lx = x - fx;
  const T hy = T(1) - ly, hx = T(1) - lx;
  const bool top = y0 >= 0, bottom = y0 + 1 < h, left = x0 >= 0, right = x0 + 1 < w;
  const T v00 = (top && left) ? plane[y0 * w + x0] : T(0);
  const T v01 = (top && right) ? plane[y0 * w + x0 + 1] : T(0);
  const T v10 = (bottom && left) ? plane[(y0 + 1) * w + x0] : T(0);
  const T v11 = (bottom && right) ? plane[(y0 + 1) * w + x0 + 1] : T(0);
  dy = hx * (v10 - v00) + lx * (v11 - v01);
  dx = hy * (v01 - v00) + ly * (v11 - v10);
}

/// Adds g times the bilinear weights of (y, x) into the plane.
template <typename T>
inline void bilinear_scatter(T* plane, std::int64_t h, std::int64_t w, T y, T x, T g) {
  if (!(y > T(-1)) || !(y < T(h)) || !(x > T(-1)) || !(x < T(w))) return;
  const T fy = std::floor(y);
  const T fx = std::floor(x);
  const auto y0 = static_cast<std::int64_t>(fy);
  const auto x0 = static_cast<std::int64_t>(fx);
  const T ly = y - fy, lx = x - fx;
  const T hy = T(1) - ly, hx = T(1) - lx;
  const bool top = y0 >= 0, bottom = y0 + 1 < h, left = x0 >= 0, right = x0 + 1 < w;
  if (top && left) plane[y0 * w + x0] += g * hy * hx;
  if (top && right) plane[y0 * w + x0 + 1] += g * hy * lx;
  if (bottom && left) plane[(y0 + 1) * w + x0] += g * ly * hx;
  if (bottom && right) plane[(y0 + 1) * w + x0 + 1] += g * ly * lx;
}

// ---------------------------------------------------------------------------
// Bilinear sampling: map [B, C, H, W], coords [B, P, 2] as (y, x) pairs,
// out [B, C, P].

struct SampleDims {
  std::int64_t batch, channels, height, width, points;
};

template <typename T>
void bilinear_sample_forward(const T* map, const T* coords, T* out, const SampleDims& d,
                             Backend backend);

template <typename T>
void bilinear_sample_backward(const T* map, const T* coords, const T* grad_out, T* grad_map,
                              T* grad_coords, const SampleDims& d, Backend backend);

// ---------------------------------------------------------------------------
// Deformable convolution. Offsets are [B, 2K, Ho, Wo] with channel 2k the y
// displacement and 2k+1 the x displacement of tap k = ki * kernel_w + kj.

struct DeformGeometry {
  std::int64_t batch = 1;
  std::int64_t in_channels = 1;
  std::int64_t out_channels = 1;
  std::int64_t height = 1, width = 1;
  std::int64_t kernel_h = 1, kernel_w = 1;
  std::int64_t stride = 1, pad = 0;

  std::int64_t out_h() const { return (height + 2 * pad - kernel_h) / stride + 1; }
  std::int64_t out_w() const { return (width + 2 * pad - kernel_w) / stride + 1; }
  std::int64_t taps() const { return kernel_h * kernel_w; }
};

/// Direct-loop forward: out [B, Co, Ho, Wo]. `bias` may be null.
template <typename T>
void deform_conv_reference_forward(const T* input, const T* offsets, const T* weight,
                                   const T* bias, T* out, const DeformGeometry& g);

/// Direct-loop backward. Any gradient pointer may be null to skip it.
template <typename T>
void deform_conv_reference_backward(const T* input, const T* offsets, const T* weight,
                                    const T* grad_out, T* grad_input, T* grad_offsets,
                                    T* grad_weight, T* grad_bias, const DeformGeometry& g);

/// Bilinear footprint of one (tap, output position): the top-left corner,
/// fractional parts and a bit per in-range corner (00, 01, 10, 11).
template <typename T>
struct TapEntry {
  std::int32_t y0 = 0, x0 = 0;
  T ly = T(0), lx = T(0);
  std::uint8_t mask = 0;
};

/// Footprints of one sample, shared by all input channels.
template <typename T>
struct TapTable {
  std::int64_t height = 0, width = 0;
  std::vector<TapEntry<T>> entries;
};

/// offsets [2K, Ho, Wo] -> K * Ho * Wo entries.
template <typename T>
void build_tap_table(const T* offsets, const DeformGeometry& g, TapTable<T>& table);

/// One sample: input [Ci, H, W] -> columns [Ci*K, Ho*Wo].
template <typename T>
void deform_im2col(const T* input, const TapTable<T>& taps, T* columns, const DeformGeometry& g);

/// One sample: scatters grad columns back onto grad_input [Ci, H, W].
template <typename T>
void deform_col2im_input(const T* grad_columns, const TapTable<T>& taps, T* grad_input,
                         const DeformGeometry& g);

/// One sample: grad_offsets [2K, Ho, Wo] from grad columns.
template <typename T>
void deform_col2im_offsets(const T* grad_columns, const T* input, const TapTable<T>& taps,
                           T* grad_offsets, const DeformGeometry& g);

// ---------------------------------------------------------------------------
// Local windows. x is [B, C, H, W]; patches and window weights are laid out
// [B, H, W, s, s, C] with zero padding outside the map.

struct WindowDims {
  std::int64_t batch, channels, height, width, size;
};

template <typename T>
void extract_patches_forward(const T* x, T* patches, const WindowDims& d, Backend backend);

template <typename T>
void extract_patches_backward(const T* grad_patches, T* grad_x, const WindowDims& d,
                              Backend backend);

/// out[b, c, i, j] = sum over the window of weights * x.
template <typename T>
void window_aggregate_forward(const T* weights, const T* x, T* out, const WindowDims& d,
                              Backend backend);

template <typename T>
void window_aggregate_backward(const T* weights, const T* x, const T* grad_out, T* grad_weights,
                               T* grad_x, const WindowDims& d, Backend backend);

}  // namespace stgen::kernels
