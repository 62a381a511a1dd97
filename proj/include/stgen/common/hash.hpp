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

#include <cstdint>
#include <string_view>

#include <torch/types.h>

namespace stgen {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

/// 64-bit FNV-1a, chainable through `seed`.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = kFnvOffset);

/// FNV-1a over a tensor's raw contiguous bytes; used for parameter hashes.
std::uint64_t fnv1a(const torch::Tensor& tensor, std::uint64_t seed = kFnvOffset);

}  // namespace stgen
