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

#include "stgen/attention/ops.hpp"

#include <sstream>

#include "stgen/common/errors.hpp"

namespace stgen::attention {

using torch::autograd::AutogradContext;
using torch::autograd::tensor_list;

namespace {

std::string shape_str(const torch::Tensor& t) {
  std::ostringstream os;
  os << t.sizes();
  return os.str();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeMismatch(what);
}

Backend backend_of(AutogradContext* ctx) {
  return static_cast<Backend>(ctx->saved_data["backend"].toInt());
}

// ---------------------------------------------------------------------------

struct BilinearSampleFn : torch::autograd::Function<BilinearSampleFn> {
  static torch::Tensor forward(AutogradContext* ctx, torch::Tensor map, torch::Tensor coords,
                               std::int64_t backend) {
    map = map.contiguous();
    coords = coords.contiguous();
    ctx->save_for_backward({map, coords});
    ctx->saved_data["backend"] = backend;
    const kernels::SampleDims d{map.size(0), map.size(1), map.size(2), map.size(3),
                                coords.size(1) * coords.size(2)};
    auto out = torch::empty({map.size(0), map.size(1), coords.size(1), coords.size(2)},
                            map.options());
    AT_DISPATCH_FLOATING_TYPES(map.scalar_type(), "bilinear_sample_forward", [&] {
      kernels::bilinear_sample_forward<scalar_t>(map.data_ptr<scalar_t>(),
                                                 coords.data_ptr<scalar_t>(),
                                                 out.data_ptr<scalar_t>(), d,
                                                 static_cast<Backend>(backend));
    });
    return out;
  }

  static tensor_list backward(AutogradContext* ctx, tensor_list grads) {
    auto saved = ctx->get_saved_variables();
    const auto& map = saved[0];
    const auto& coords = saved[1];
    auto grad_out = grads[0].contiguous();
    const kernels::SampleDims d{map.size(0), map.size(1), map.size(2), map.size(3),
                                coords.size(1) * coords.size(2)};
    auto grad_map = torch::zeros_like(map);
    auto grad_coords = torch::zeros_like(coords);
    AT_DISPATCH_FLOATING_TYPES(map.scalar_type(), "bilinear_sample_backward", [&] {
      kernels::bilinear_sample_backward<scalar_t>(
          map.data_ptr<scalar_t>(), coords.data_ptr<scalar_t>(), grad_out.data_ptr<scalar_t>(),
          grad_map.data_ptr<scalar_t>(), grad_coords.data_ptr<scalar_t>(), d, backend_of(ctx));
    });
    return {grad_map, grad_coords, torch::Tensor()};
  }
};

// ---------------------------------------------------------------------------

kernels::DeformGeometry geometry_of(const torch::Tensor& input, const torch::Tensor& weight,
                                    std::int64_t stride, std::int64_t padding) {
  kernels::DeformGeometry g;
  g.batch = input.size(0);
  g.in_channels = input.size(1);
  g.height = input.size(2);
  g.width = input.size(3);
  g.out_channels = weight.size(0);
  g.kernel_h = weight.size(2);
  g.kernel_w = weight.size(3);
  g.stride = stride;
  g.pad = padding;
  return g;
}

struct DeformConvFn : torch::autograd::Function<DeformConvFn> {
  static torch::Tensor forward(AutogradContext* ctx, torch::Tensor input, torch::Tensor offsets,
                               torch::Tensor weight, torch::Tensor bias, std::int64_t stride,
                               std::int64_t padding, std::int64_t backend) {
    input = input.contiguous();
    offsets = offsets.contiguous();
    weight = weight.contiguous();
    const bool has_bias = bias.defined();
    ctx->save_for_backward({input, offsets, weight});
    ctx->saved_data["stride"] = stride;
    ctx->saved_data["padding"] = padding;
    ctx->saved_data["backend"] = backend;
    ctx->saved_data["has_bias"] = has_bias;

    const auto g = geometry_of(input, weight, stride, padding);
    const auto ho = g.out_h(), wo = g.out_w();
    auto out = torch::empty({g.batch, g.out_channels, ho, wo}, input.options());

    if (static_cast<Backend>(backend) == Backend::kReference) {
      auto b = has_bias ? bias.contiguous() : torch::Tensor();
      AT_DISPATCH_FLOATING_TYPES(input.scalar_type(), "deform_conv_reference_forward", [&] {
        kernels::deform_conv_reference_forward<scalar_t>(
            input.data_ptr<scalar_t>(), offsets.data_ptr<scalar_t>(), weight.data_ptr<scalar_t>(),
            has_bias ? b.data_ptr<scalar_t>() : nullptr, out.data_ptr<scalar_t>(), g);
      });
      return out;
    }

    const auto w_flat = weight.view({g.out_channels, -1});
    auto columns = torch::empty({g.in_channels * g.taps(), ho * wo}, input.options());
    for (std::int64_t b = 0; b < g.batch; ++b) {
      AT_DISPATCH_FLOATING_TYPES(input.scalar_type(), "deform_im2col", [&] {
        kernels::TapTable<scalar_t> taps;
        kernels::build_tap_table<scalar_t>(offsets[b].data_ptr<scalar_t>(), g, taps);
        kernels::deform_im2col<scalar_t>(input[b].data_ptr<scalar_t>(), taps,
                                         columns.data_ptr<scalar_t>(), g);
      });
      auto out_b = out[b].view({g.out_channels, ho * wo});
      torch::mm_out(out_b, w_flat, columns);
    }
    if (has_bias) out.add_(bias.view({1, -1, 1, 1}));
    return out;
  }

  static tensor_list backward(AutogradContext* ctx, tensor_list grads) {
    auto saved = ctx->get_saved_variables();
    const auto& input = saved[0];
    const auto& offsets = saved[1];
    const auto& weight = saved[2];
    const auto stride = ctx->saved_data["stride"].toInt();
    const auto padding = ctx->saved_data["padding"].toInt();
    const auto backend = backend_of(ctx);
    const bool has_bias = ctx->saved_data["has_bias"].toBool();
    auto grad_out = grads[0].contiguous();

    const auto g = geometry_of(input, weight, stride, padding);
    const auto ho = g.out_h(), wo = g.out_w();
    auto grad_input = torch::zeros_like(input);
    auto grad_offsets = torch::zeros_like(offsets);
    auto grad_weight = torch::zeros_like(weight);
    torch::Tensor grad_bias = has_bias ? grad_out.sum({0, 2, 3}) : torch::Tensor();

    if (backend == Backend::kReference) {
      AT_DISPATCH_FLOATING_TYPES(input.scalar_type(), "deform_conv_reference_backward", [&] {
        kernels::deform_conv_reference_backward<scalar_t>(
            input.data_ptr<scalar_t>(), offsets.data_ptr<scalar_t>(), weight.data_ptr<scalar_t>(),
            grad_out.data_ptr<scalar_t>(), grad_input.data_ptr<scalar_t>(),
            grad_offsets.data_ptr<scalar_t>(), grad_weight.data_ptr<scalar_t>(), nullptr, g);
      });
      return {grad_input, grad_offsets, grad_weight, grad_bias,
              torch::Tensor(), torch::Tensor(), torch::Tensor()};
    }

    const bool need_input = ctx->needs_input_grad(0);
    const bool need_offsets = ctx->needs_input_grad(1);
    const auto w_flat = weight.view({g.out_channels, -1});
    auto grad_w_flat = grad_weight.view({g.out_channels, -1});
    auto columns = torch::empty({g.in_channels * g.taps(), ho * wo}, input.options());
    for (std::int64_t b = 0; b < g.batch; ++b) {
      const auto go_b = grad_out[b].view({g.out_channels, ho * wo});
      auto grad_columns = w_flat.t().mm(go_b).contiguous();
      AT_DISPATCH_FLOATING_TYPES(input.scalar_type(), "deform_col2im", [&] {
        kernels::TapTable<scalar_t> taps;
        kernels::build_tap_table<scalar_t>(offsets[b].data_ptr<scalar_t>(), g, taps);
        if (need_input) {
          kernels::deform_col2im_input<scalar_t>(grad_columns.data_ptr<scalar_t>(), taps,
                                                 grad_input[b].data_ptr<scalar_t>(), g);
        }
        if (need_offsets) {
          kernels::deform_col2im_offsets<scalar_t>(grad_columns.data_ptr<scalar_t>(),
                                                   input[b].data_ptr<scalar_t>(), taps,
                                                   grad_offsets[b].data_ptr<scalar_t>(), g);
        }
        kernels::deform_im2col<scalar_t>(input[b].data_ptr<scalar_t>(), taps,
                                         columns.data_ptr<scalar_t>(), g);
      });
      grad_w_flat.addmm_(go_b, columns.t());
    }
    return {grad_input, grad_offsets, grad_weight, grad_bias,
            torch::Tensor(), torch::Tensor(), torch::Tensor()};
  }
};

// ---------------------------------------------------------------------------

kernels::WindowDims window_dims(const torch::Tensor& x, std::int64_t size) {
  return {x.size(0), x.size(1), x.size(2), x.size(3), size};
}

struct ExtractPatchesFn : torch::autograd::Function<ExtractPatchesFn> {
  static torch::Tensor forward(AutogradContext* ctx, torch::Tensor x, std::int64_t size,
                               std::int64_t backend) {
    x = x.contiguous();
    ctx->saved_data["backend"] = backend;
    ctx->saved_data["size"] = size;
    ctx->saved_data["shape"] = x.sizes().vec();
    const auto d = window_dims(x, size);
    auto patches = torch::empty({d.batch, d.height, d.width, size, size, d.channels}, x.options());
    AT_DISPATCH_FLOATING_TYPES(x.scalar_type(), "extract_patches_forward", [&] {
      kernels::extract_patches_forward<scalar_t>(x.data_ptr<scalar_t>(),
                                                 patches.data_ptr<scalar_t>(), d,
                                                 static_cast<Backend>(backend));
    });
    return patches;
  }

  static tensor_list backward(AutogradContext* ctx, tensor_list grads) {
    const auto shape = ctx->saved_data["shape"].toIntVector();
    const auto size = ctx->saved_data["size"].toInt();
    auto grad_patches = grads[0].contiguous();
    auto grad_x = torch::zeros(shape, grad_patches.options());
    const auto d = window_dims(grad_x, size);
    AT_DISPATCH_FLOATING_TYPES(grad_x.scalar_type(), "extract_patches_backward", [&] {
      kernels::extract_patches_backward<scalar_t>(grad_patches.data_ptr<scalar_t>(),
                                                  grad_x.data_ptr<scalar_t>(), d,
                                                  backend_of(ctx));
    });
    return {grad_x, torch::Tensor(), torch::Tensor()};
  }
};

struct WindowAggregateFn : torch::autograd::Function<WindowAggregateFn> {
  static torch::Tensor forward(AutogradContext* ctx, torch::Tensor weights, torch::Tensor x,
                               std::int64_t backend) {
    weights = weights.contiguous();
    x = x.contiguous();
    ctx->save_for_backward({weights, x});
    ctx->saved_data["backend"] = backend;
    const auto d = window_dims(x, weights.size(3));
    auto out = torch::empty_like(x);
    AT_DISPATCH_FLOATING_TYPES(x.scalar_type(), "window_aggregate_forward", [&] {
      kernels::window_aggregate_forward<scalar_t>(weights.data_ptr<scalar_t>(),
                                                  x.data_ptr<scalar_t>(),
                                                  out.data_ptr<scalar_t>(), d,
                                                  static_cast<Backend>(backend));
    });
    return out;
  }

  static tensor_list backward(AutogradContext* ctx, tensor_list grads) {
    auto saved = ctx->get_saved_variables();
    const auto& weights = saved[0];
    const auto& x = saved[1];
    auto grad_out = grads[0].contiguous();
    const auto d = window_dims(x, weights.size(3));
    auto grad_weights = torch::zeros_like(weights);
    auto grad_x = torch::zeros_like(x);
    AT_DISPATCH_FLOATING_TYPES(x.scalar_type(), "window_aggregate_backward", [&] {
      kernels::window_aggregate_backward<scalar_t>(
          weights.data_ptr<scalar_t>(), x.data_ptr<scalar_t>(), grad_out.data_ptr<scalar_t>(),
          grad_weights.data_ptr<scalar_t>(), grad_x.data_ptr<scalar_t>(), d, backend_of(ctx));
    });
    return {grad_weights, grad_x, torch::Tensor()};
  }
};

}  // namespace

torch::Tensor bilinear_sample(const torch::Tensor& map, const torch::Tensor& coords,
                              Backend backend) {
  require(map.dim() == 4 && map.numel() > 0, "bilinear_sample: map must be a nonempty [B,C,H,W], got " +
                                                 shape_str(map));
  require(coords.dim() == 4 && coords.size(3) == 2 && coords.size(0) == map.size(0),
          "bilinear_sample: coords must be [B,Ho,Wo,2] matching the map batch, got " +
              shape_str(coords));
  require(coords.scalar_type() == map.scalar_type(), "bilinear_sample: dtype mismatch");
  return BilinearSampleFn::apply(map, coords, static_cast<std::int64_t>(backend));
}

torch::Tensor deform_conv2d(const torch::Tensor& input, const torch::Tensor& offsets,
                            const torch::Tensor& weight, const torch::Tensor& bias,
                            const DeformConvOptions& options) {
  require(input.dim() == 4, "deform_conv2d: input must be [B,C,H,W], got " + shape_str(input));
  require(weight.dim() == 4 && weight.size(1) == input.size(1),
          "deform_conv2d: weight " + shape_str(weight) + " does not match input " +
              shape_str(input));
  require(!bias.defined() || (bias.dim() == 1 && bias.size(0) == weight.size(0)),
          "deform_conv2d: bias must be [Co]");
  const auto g = geometry_of(input, weight, options.stride, options.padding);
  require(g.out_h() > 0 && g.out_w() > 0, "deform_conv2d: empty output");
  require(offsets.dim() == 4 && offsets.size(0) == g.batch && offsets.size(1) == 2 * g.taps() &&
              offsets.size(2) == g.out_h() && offsets.size(3) == g.out_w(),
          "deform_conv2d: offsets must be [" + std::to_string(g.batch) + "," +
              std::to_string(2 * g.taps()) + "," + std::to_string(g.out_h()) + "," +
              std::to_string(g.out_w()) + "], got " + shape_str(offsets));
  require(offsets.scalar_type() == input.scalar_type() &&
              weight.scalar_type() == input.scalar_type(),
          "deform_conv2d: dtype mismatch");
  // Autograd functions cannot carry an undefined tensor input.
  const auto b = bias.defined() ? bias : torch::zeros({weight.size(0)}, weight.options());
  return DeformConvFn::apply(input, offsets, weight, b, options.stride, options.padding,
                             static_cast<std::int64_t>(options.backend));
}

torch::Tensor extract_patches(const torch::Tensor& x, std::int64_t size, Backend backend) {
  require(x.dim() == 4, "extract_patches: x must be [B,C,H,W], got " + shape_str(x));
  if (size < 1 || size % 2 == 0) {
    throw InvalidPatchSize("patch size must be odd and positive, got " + std::to_string(size));
  }
  return ExtractPatchesFn::apply(x, size, static_cast<std::int64_t>(backend));
}

torch::Tensor window_aggregate(const torch::Tensor& weights, const torch::Tensor& x,
                               Backend backend) {
  require(x.dim() == 4, "window_aggregate: x must be [B,C,H,W], got " + shape_str(x));
  require(weights.dim() == 6 && weights.size(0) == x.size(0) && weights.size(1) == x.size(2) &&
              weights.size(2) == x.size(3) && weights.size(3) == weights.size(4) &&
              weights.size(5) == x.size(1),
          "window_aggregate: weights " + shape_str(weights) + " do not match x " + shape_str(x));
  if (weights.size(3) % 2 == 0) throw InvalidPatchSize("window size must be odd");
  require(weights.scalar_type() == x.scalar_type(), "window_aggregate: dtype mismatch");
  return WindowAggregateFn::apply(weights, x, static_cast<std::int64_t>(backend));
}

}  // namespace stgen::attention
