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

namespace stgen::init {

constexpr double kLinearStd = 0.01;

/// He (fan-in, ReLU gain) normal weights, zero bias.
void conv(torch::nn::Conv2d& layer);

/// N(0, 0.01) weights, zero bias.
void linear(torch::nn::Linear& layer);

/// Zero weights and bias.
void zero(torch::nn::Conv2d& layer);

}  // namespace stgen::init
