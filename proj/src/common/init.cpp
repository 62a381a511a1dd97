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

#include "stgen/common/init.hpp"

namespace stgen::init {

void conv(torch::nn::Conv2d& layer) {
  torch::NoGradGuard no_grad;
  torch::nn::init::kaiming_normal_(layer->weight, 0.0, torch::kFanIn, torch::kReLU);
  if (layer->bias.defined()) layer->bias.zero_();
}

void linear(torch::nn::Linear& layer) {
  torch::NoGradGuard no_grad;
  layer->weight.normal_(0.0, kLinearStd);
  if (layer->bias.defined()) layer->bias.zero_();
}

void zero(torch::nn::Conv2d& layer) {
  torch::NoGradGuard no_grad;
  layer->weight.zero_();
  if (layer->bias.defined()) layer->bias.zero_();
}

}  // namespace stgen::init
