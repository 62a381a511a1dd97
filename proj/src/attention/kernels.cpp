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

#include "stgen/attention/kernels.hpp"

namespace stgen::kernels {

using Index = std::int64_t;

const char* backend_name(Backend backend) {
  return backend == Backend::kReference ? "reference" : "openmp";
}

// ---------------------------------------------------------------------------
// Bilinear sampling

template <typename T>
void bilinear_sample_forward(const T* map, const T* coords, T* out, const SampleDims& d,
                             Backend backend) {
  const Index plane = d.height * d.width;
  if (backend == Backend::kReference) {
    for (Index b = 0; b < d.batch; ++b)
      for (Index c = 0; c < d.channels; ++c)
        for (Index p = 0; p < d.points; ++p) {
          const T* yx = coords + (b * d.points + p) * 2;
          out[(b * d.channels + c) * d.points + p] =
              bilinear(map + (b * d.channels + c) * plane, d.height, d.width, yx[0], yx[1]);
        }
    return;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (Index b = 0; b < d.batch; ++b)
    for (Index p = 0; p < d.points; ++p) {
      const T* yx = coords + (b * d.points + p) * 2;
      for (Index c = 0; c < d.channels; ++c) {
        out[(b * d.channels + c) * d.points + p] =
            bilinear(map + (b * d.channels + c) * plane, d.height, d.width, yx[0], yx[1]);
      }
    }
}

template <typename T>
void bilinear_sample_backward(const T* map, const T* coords, const T* grad_out, T* grad_map,
                              T* grad_coords, const SampleDims& d, Backend backend) {
  const Index plane = d.height * d.width;
  if (backend == Backend::kReference) {
    for (Index b = 0; b < d.batch; ++b)
      for (Index c = 0; c < d.channels; ++c)
        for (Index p = 0; p < d.points; ++p) {
          const T* yx = coords + (b * d.points + p) * 2;
          const T g = grad_out[(b * d.channels + c) * d.points + p];
          const Index off = (b * d.channels + c) * plane;
          if (grad_map) bilinear_scatter(grad_map + off, d.height, d.width, yx[0], yx[1], g);
          if (grad_coords) {
            T dy, dx;
            bilinear_coord_grad(map + off, d.height, d.width, yx[0], yx[1], dy, dx);
            grad_coords[(b * d.points + p) * 2] += g * dy;
            grad_coords[(b * d.points + p) * 2 + 1] += g * dx;
          }
        }
    return;
  }
  if (grad_map) {
    // Each (b, c) plane is owned by one thread.
#pragma omp parallel for collapse(2) schedule(static)
    for (Index b = 0; b < d.batch; ++b)
      for (Index c = 0; c < d.channels; ++c) {
        T* dst = grad_map + (b * d.channels + c) * plane;
        const T* g = grad_out + (b * d.channels + c) * d.points;
        for (Index p = 0; p < d.points; ++p) {
          const T* yx = coords + (b * d.points + p) * 2;
          bilinear_scatter(dst, d.height, d.width, yx[0], yx[1], g[p]);
        }
      }
  }
  if (grad_coords) {
#pragma omp parallel for collapse(2) schedule(static)
    for (Index b = 0; b < d.batch; ++b)
      for (Index p = 0; p < d.points; ++p) {
        const T* yx = coords + (b * d.points + p) * 2;
        T sy = T(0), sx = T(0);
        for (Index c = 0; c < d.channels; ++c) {
          T dy, dx;
          bilinear_coord_grad(map + (b * d.channels + c) * plane, d.height, d.width, yx[0], yx[1],
                              dy, dx);
          const T g = grad_out[(b * d.channels + c) * d.points + p];
          sy += g * dy;
          sx += g * dx;
        }
        grad_coords[(b * d.points + p) * 2] += sy;
        grad_coords[(b * d.points + p) * 2 + 1] += sx;
      }
  }
}

// ---------------------------------------------------------------------------
// Deformable convolution

namespace {

template <typename T>
struct TapSample {
  T y, x;
};

template <typename T>
inline TapSample<T> tap_position(const T* offsets, const DeformGeometry& g, Index k, Index ho,
                                 Index wo) {
  const Index ho_wo = g.out_h() * g.out_w();
  const Index pos = ho * g.out_w() + wo;
  const Index ki = k / g.kernel_w;
  const Index kj = k % g.kernel_w;
  return {static_cast<T>(ho * g.stride - g.pad + ki) + offsets[(2 * k) * ho_wo + pos],
          static_cast<T>(wo * g.stride - g.pad + kj) + offsets[(2 * k + 1) * ho_wo + pos]};
}

}  // namespace

template <typename T>
void deform_conv_reference_forward(const T* input, const T* offsets, const T* weight,
                                   const T* bias, T* out, const DeformGeometry& g) {
  const Index ho_n = g.out_h(), wo_n = g.out_w(), k_n = g.taps();
  const Index plane = g.height * g.width;
  for (Index b = 0; b < g.batch; ++b) {
    const T* in_b = input + b * g.in_channels * plane;
    const T* off_b = offsets + b * 2 * k_n * ho_n * wo_n;
    for (Index co = 0; co < g.out_channels; ++co)
      for (Index ho = 0; ho < ho_n; ++ho)
        for (Index wo = 0; wo < wo_n; ++wo) {
          T acc = bias ? bias[co] : T(0);
          for (Index ci = 0; ci < g.in_channels; ++ci)
            for (Index k = 0; k < k_n; ++k) {
              const auto s = tap_position(off_b, g, k, ho, wo);
              acc += weight[(co * g.in_channels + ci) * k_n + k] *
                     bilinear(in_b + ci * plane, g.height, g.width, s.y, s.x);
            }
          out[((b * g.out_channels + co) * ho_n + ho) * wo_n + wo] = acc;
        }
  }
}

template <typename T>
void deform_conv_reference_backward(const T* input, const T* offsets, const T* weight,
                                    const T* grad_out, T* grad_input, T* grad_offsets,
                                    T* grad_weight, T* grad_bias, const DeformGeometry& g) {
  const Index ho_n = g.out_h(), wo_n = g.out_w(), k_n = g.taps();
  const Index plane = g.height * g.width;
  const Index ho_wo = ho_n * wo_n;
  for (Index b = 0; b < g.batch; ++b) {
    const T* in_b = input + b * g.in_channels * plane;
    const T* off_b = offsets + b * 2 * k_n * ho_wo;
    for (Index co = 0; co < g.out_channels; ++co)
      for (Index ho = 0; ho < ho_n; ++ho)
        for (Index wo = 0; wo < wo_n; ++wo) {
          const T go = grad_out[((b * g.out_channels + co) * ho_n + ho) * wo_n + wo];
          if (grad_bias) grad_bias[co] += go;
          for (Index ci = 0; ci < g.in_channels; ++ci)
            for (Index k = 0; k < k_n; ++k) {
              const auto s = tap_position(off_b, g, k, ho, wo);
              const T w = weight[(co * g.in_channels + ci) * k_n + k];
              const T* src = in_b + ci * plane;
              if (grad_weight) {
                grad_weight[(co * g.in_channels + ci) * k_n + k] +=
                    go * bilinear(src, g.height, g.width, s.y, s.x);
              }
              if (grad_input) {
                bilinear_scatter(grad_input + (b * g.in_channels + ci) * plane, g.height, g.width,
                                 s.y, s.x, go * w);
              }
              if (grad_offsets) {
                T dy, dx;
                bilinear_coord_grad(src, g.height, g.width, s.y, s.x, dy, dx);
                const Index pos = ho * wo_n + wo;
                grad_offsets[(b * 2 * k_n + 2 * k) * ho_wo + pos] += go * w * dy;
                grad_offsets[(b * 2 * k_n + 2 * k + 1) * ho_wo + pos] += go * w * dx;
              }
            }
        }
  }
}

template <typename T>
void build_tap_table(const T* offsets, const DeformGeometry& g, TapTable<T>& table) {
  const Index ho_n = g.out_h(), wo_n = g.out_w(), k_n = g.taps();
  const Index ho_wo = ho_n * wo_n;
  const Index h = g.height, w = g.width;
  table.height = h;
  table.width = w;
  table.entries.resize(static_cast<std::size_t>(k_n * ho_wo));
  TapEntry<T>* entries = table.entries.data();
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < k_n; ++k) {
    const T* off_y = offsets + (2 * k) * ho_wo;
    const T* off_x = offsets + (2 * k + 1) * ho_wo;
    const Index ki = k / g.kernel_w, kj = k % g.kernel_w;
    for (Index ho = 0; ho < ho_n; ++ho)
      for (Index wo = 0; wo < wo_n; ++wo) {
        const Index pos = ho * wo_n + wo;
        const T y = static_cast<T>(ho * g.stride - g.pad + ki) + off_y[pos];
        const T x = static_cast<T>(wo * g.stride - g.pad + kj) + off_x[pos];
        auto& e = entries[k * ho_wo + pos];
        if (!(y > T(-1)) || !(y < T(h)) || !(x > T(-1)) || !(x < T(w))) {
          e = {};
          continue;
        }
        const T fy = std::floor(y), fx = std::floor(x);
        e.y0 = static_cast<std::int32_t>(fy);
        e.x0 = static_cast<std::int32_t>(fx);
        e.ly = y - fy;
        e.lx = x - fx;
        e.mask = static_cast<std::uint8_t>(
            (e.y0 >= 0 && e.x0 >= 0) | (e.y0 >= 0 && e.x0 + 1 < w) << 1 |
            (e.y0 + 1 < h && e.x0 >= 0) << 2 | (e.y0 + 1 < h && e.x0 + 1 < w) << 3);
      }
  }
}

namespace {

// Values of the four corners of a tap, zero where the corner is outside.
template <typename T>
inline void corner_values(const T* src, const TapEntry<T>& e, std::int64_t w, T v[4]) {
  const std::int64_t base = static_cast<std::int64_t>(e.y0) * w + e.x0;
  v[0] = (e.mask & 1) ? src[base] : T(0);
  v[1] = (e.mask & 2) ? src[base + 1] : T(0);
  v[2] = (e.mask & 4) ? src[base + w] : T(0);
  v[3] = (e.mask & 8) ? src[base + w + 1] : T(0);
}

}  // namespace

template <typename T>
void deform_im2col(const T* input, const TapTable<T>& taps, T* columns, const DeformGeometry& g) {
  const Index k_n = g.taps(), ho_wo = g.out_h() * g.out_w();
  const Index plane = g.height * g.width, w = g.width;
  const TapEntry<T>* entries = taps.entries.data();
#pragma omp parallel for collapse(2) schedule(static)
  for (Index ci = 0; ci < g.in_channels; ++ci)
    for (Index k = 0; k < k_n; ++k) {
      const T* src = input + ci * plane;
      T* row = columns + (ci * k_n + k) * ho_wo;
      const TapEntry<T>* tap = entries + k * ho_wo;
      for (Index pos = 0; pos < ho_wo; ++pos) {
        const auto& e = tap[pos];
        if (!e.mask) {
          row[pos] = T(0);
          continue;
        }
        T v[4];
        corner_values(src, e, w, v);
        const T hy = T(1) - e.ly, hx = T(1) - e.lx;
        row[pos] = hy * (hx * v[0] + e.lx * v[1]) + e.ly * (hx * v[2] + e.lx * v[3]);
      }
    }
}

template <typename T>
void deform_col2im_input(const T* grad_columns, const TapTable<T>& taps, T* grad_input,
                         const DeformGeometry& g) {
  const Index k_n = g.taps(), ho_wo = g.out_h() * g.out_w();
  const Index plane = g.height * g.width, w = g.width;
  const TapEntry<T>* entries = taps.entries.data();
  // Parallel over input channels: every channel scatters only into its own plane.
#pragma omp parallel for schedule(static)
  for (Index ci = 0; ci < g.in_channels; ++ci) {
    T* dst = grad_input + ci * plane;
    for (Index k = 0; k < k_n; ++k) {
      const T* row = grad_columns + (ci * k_n + k) * ho_wo;
      const TapEntry<T>* tap = entries + k * ho_wo;
      for (Index pos = 0; pos < ho_wo; ++pos) {
        const auto& e = tap[pos];
        if (!e.mask) continue;
        const T v = row[pos];
        const T hy = T(1) - e.ly, hx = T(1) - e.lx;
        const Index base = static_cast<Index>(e.y0) * w + e.x0;
        if (e.mask & 1) dst[base] += hy * hx * v;
        if (e.mask & 2) dst[base + 1] += hy * e.lx * v;
        if (e.mask & 4) dst[base + w] += e.ly * hx * v;
        if (e.mask & 8) dst[base + w + 1] += e.ly * e.lx * v;
      }
    }
  }
}

template <typename T>
void deform_col2im_offsets(const T* grad_columns, const T* input, const TapTable<T>& taps,
                           T* grad_offsets, const DeformGeometry& g) {
  const Index k_n = g.taps(), ho_wo = g.out_h() * g.out_w();
  const Index plane = g.height * g.width, w = g.width;
  const TapEntry<T>* entries = taps.entries.data();
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < k_n; ++k) {
    T* out_y = grad_offsets + (2 * k) * ho_wo;
    T* out_x = grad_offsets + (2 * k + 1) * ho_wo;
    const TapEntry<T>* tap = entries + k * ho_wo;
    for (Index ci = 0; ci < g.in_channels; ++ci) {
      const T* src = input + ci * plane;
      const T* row = grad_columns + (ci * k_n + k) * ho_wo;
      for (Index pos = 0; pos < ho_wo; ++pos) {
        const auto& e = tap[pos];
        if (!e.mask) continue;
        T v[4];
        corner_values(src, e, w, v);
        const T hy = T(1) - e.ly, hx = T(1) - e.lx;
        const T gc = row[pos];
        out_y[pos] += gc * (hx * (v[2] - v[0]) + e.lx * (v[3] - v[1]));
        out_x[pos] += gc * (hy * (v[1] - v[0]) + e.ly * (v[3] - v[2]));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Local windows

namespace {

inline Index patch_index(const WindowDims& d, Index b, Index i, Index j, Index dy, Index dx,
                         Index c) {
  return ((((b * d.height + i) * d.width + j) * d.size + dy) * d.size + dx) * d.channels + c;
}

}  // namespace

template <typename T>
void extract_patches_forward(const T* x, T* patches, const WindowDims& d, Backend backend) {
  const Index r = d.size / 2;
  const Index plane = d.height * d.width;
  auto fill = [&](Index b, Index i) {
    for (Index j = 0; j < d.width; ++j)
      for (Index dy = 0; dy < d.size; ++dy)
        for (Index dx = 0; dx < d.size; ++dx) {
          const Index y = i + dy - r, xx = j + dx - r;
          const bool inside = y >= 0 && y < d.height && xx >= 0 && xx < d.width;
          for (Index c = 0; c < d.channels; ++c) {
            patches[patch_index(d, b, i, j, dy, dx, c)] =
                inside ? x[(b * d.channels + c) * plane + y * d.width + xx] : T(0);
          }
        }
  };
  if (backend == Backend::kReference) {
    for (Index b = 0; b < d.batch; ++b)
      for (Index i = 0; i < d.height; ++i) fill(b, i);
    return;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (Index b = 0; b < d.batch; ++b)
    for (Index i = 0; i < d.height; ++i) fill(b, i);
}

template <typename T>
void extract_patches_backward(const T* grad_patches, T* grad_x, const WindowDims& d,
                              Backend backend) {
  const Index r = d.size / 2;
  const Index plane = d.height * d.width;
  if (backend == Backend::kReference) {
    // Scatter form: walk the patches, add each entry to the pixel it copied.
    for (Index b = 0; b < d.batch; ++b)
      for (Index i = 0; i < d.height; ++i)
        for (Index j = 0; j < d.width; ++j)
          for (Index dy = 0; dy < d.size; ++dy)
            for (Index dx = 0; dx < d.size; ++dx) {
              const Index y = i + dy - r, xx = j + dx - r;
              if (y < 0 || y >= d.height || xx < 0 || xx >= d.width) continue;
              for (Index c = 0; c < d.channels; ++c) {
                grad_x[(b * d.channels + c) * plane + y * d.width + xx] +=
                    grad_patches[patch_index(d, b, i, j, dy, dx, c)];
              }
            }
    return;
  }
  // Gather form: each output pixel sums the patch entries that copied it.
#pragma omp parallel for collapse(2) schedule(static)
  for (Index b = 0; b < d.batch; ++b)
    for (Index y = 0; y < d.height; ++y)
      for (Index xx = 0; xx < d.width; ++xx)
        for (Index dy = 0; dy < d.size; ++dy)
          for (Index dx = 0; dx < d.size; ++dx) {
            const Index i = y - dy + r, j = xx - dx + r;
            if (i < 0 || i >= d.height || j < 0 || j >= d.width) continue;
            for (Index c = 0; c < d.channels; ++c) {
              grad_x[(b * d.channels + c) * plane + y * d.width + xx] +=
                  grad_patches[patch_index(d, b, i, j, dy, dx, c)];
            }
          }
}

template <typename T>
void window_aggregate_forward(const T* weights, const T* x, T* out, const WindowDims& d,
                              Backend backend) {
  const Index r = d.size / 2;
  const Index plane = d.height * d.width;
  auto row = [&](Index b, Index i) {
    for (Index j = 0; j < d.width; ++j)
      for (Index c = 0; c < d.channels; ++c) {
        T acc = T(0);
        for (Index dy = 0; dy < d.size; ++dy) {
          const Index y = i + dy - r;
          if (y < 0 || y >= d.height) continue;
          for (Index dx = 0; dx < d.size; ++dx) {
            const Index xx = j + dx - r;
            if (xx < 0 || xx >= d.width) continue;
            acc += weights[patch_index(d, b, i, j, dy, dx, c)] *
                   x[(b * d.channels + c) * plane + y * d.width + xx];
          }
        }
        out[(b * d.channels + c) * plane + i * d.width + j] = acc;
      }
  };
  if (backend == Backend::kReference) {
    for (Index b = 0; b < d.batch; ++b)
      for (Index i = 0; i < d.height; ++i) row(b, i);
    return;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (Index b = 0; b < d.batch; ++b)
    for (Index i = 0; i < d.height; ++i) row(b, i);
}

template <typename T>
void window_aggregate_backward(const T* weights, const T* x, const T* grad_out, T* grad_weights,
                               T* grad_x, const WindowDims& d, Backend backend) {
  const Index r = d.size / 2;
  const Index plane = d.height * d.width;
  if (backend == Backend::kReference) {
    for (Index b = 0; b < d.batch; ++b)
      for (Index i = 0; i < d.height; ++i)
        for (Index j = 0; j < d.width; ++j)
          for (Index c = 0; c < d.channels; ++c) {
            const T g = grad_out[(b * d.channels + c) * plane + i * d.width + j];
            for (Index dy = 0; dy < d.size; ++dy)
              for (Index dx = 0; dx < d.size; ++dx) {
                const Index y = i + dy - r, xx = j + dx - r;
                if (y < 0 || y >= d.height || xx < 0 || xx >= d.width) continue;
                const Index pi = patch_index(d, b, i, j, dy, dx, c);
                const Index xi = (b * d.channels + c) * plane + y * d.width + xx;
                if (grad_weights) grad_weights[pi] += g * x[xi];
                if (grad_x) grad_x[xi] += g * weights[pi];
              }
          }
    return;
  }
  if (grad_weights) {
#pragma omp parallel for collapse(2) schedule(static)
    for (Index b = 0; b < d.batch; ++b)
      for (Index i = 0; i < d.height; ++i)
        for (Index j = 0; j < d.width; ++j)
          for (Index dy = 0; dy < d.size; ++dy)
            for (Index dx = 0; dx < d.size; ++dx) {
              const Index y = i + dy - r, xx = j + dx - r;
              if (y < 0 || y >= d.height || xx < 0 || xx >= d.width) continue;
              for (Index c = 0; c < d.channels; ++c) {
                grad_weights[patch_index(d, b, i, j, dy, dx, c)] +=
                    grad_out[(b * d.channels + c) * plane + i * d.width + j] *
                    x[(b * d.channels + c) * plane + y * d.width + xx];
              }
            }
  }
  if (grad_x) {
#pragma omp parallel for collapse(2) schedule(static)
    for (Index b = 0; b < d.batch; ++b)
      for (Index c = 0; c < d.channels; ++c)
        for (Index y = 0; y < d.height; ++y)
          for (Index xx = 0; xx < d.width; ++xx) {
            T acc = T(0);
            for (Index dy = 0; dy < d.size; ++dy)
              for (Index dx = 0; dx < d.size; ++dx) {
                const Index i = y - dy + r, j = xx - dx + r;
                if (i < 0 || i >= d.height || j < 0 || j >= d.width) continue;
                acc += grad_out[(b * d.channels + c) * plane + i * d.width + j] *
                       weights[patch_index(d, b, i, j, dy, dx, c)];
              }
            grad_x[(b * d.channels + c) * plane + y * d.width + xx] += acc;
          }
  }
}

#define STGEN_INSTANTIATE(T)                                                                  \
  template void bilinear_sample_forward<T>(const T*, const T*, T*, const SampleDims&,         \
                                           Backend);                                          \
  template void bilinear_sample_backward<T>(const T*, const T*, const T*, T*, T*,             \
                                            const SampleDims&, Backend);                      \
  template void deform_conv_reference_forward<T>(const T*, const T*, const T*, const T*, T*,  \
                                                 const DeformGeometry&);                      \
  template void deform_conv_reference_backward<T>(const T*, const T*, const T*, const T*, T*, \
                                                  T*, T*, T*, const DeformGeometry&);         \
  template void build_tap_table<T>(const T*, const DeformGeometry&, TapTable<T>&);            \
  template void deform_im2col<T>(const T*, const TapTable<T>&, T*, const DeformGeometry&);     \
  template void deform_col2im_input<T>(const T*, const TapTable<T>&, T*, const DeformGeometry&); \
  template void deform_col2im_offsets<T>(const T*, const T*, const TapTable<T>&, T*,          \
                                         const DeformGeometry&);                              \
  template void extract_patches_forward<T>(const T*, T*, const WindowDims&, Backend);         \
  template void extract_patches_backward<T>(const T*, T*, const WindowDims&, Backend);        \
  template void window_aggregate_forward<T>(const T*, const T*, T*, const WindowDims&,        \
                                            Backend);                                         \
  template void window_aggregate_backward<T>(const T*, const T*, const T*, T*, T*,            \
                                             const WindowDims&, Backend);

STGEN_INSTANTIATE(float)
STGEN_INSTANTIATE(double)

#undef STGEN_INSTANTIATE

}  // namespace stgen::kernels
