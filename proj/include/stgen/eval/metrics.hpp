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

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stgen::eval {

/// Unit-cost edit distance over code points. Throws InvalidUtf8.
std::size_t levenshtein(std::string_view a, std::string_view b);
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// 1 - levenshtein / max(len). Throws BothEmpty.
double normalized_edit_distance(std::string_view pred, std::string_view gt);

struct EvalReport {
  double accuracy = 0.0;
  double mean_norm_ed = 0.0;
  std::size_t n = 0;

  /// "n=.. accuracy=.. mean_norm_ed=.."
  std::string to_string() const;
};

using Pair = std::pair<std::string, std::string>;  // (prediction, ground truth)

/// Throws EmptyInput. A pair of two empty strings counts as an exact match
/// with normalized edit distance 1.
EvalReport evaluate(const std::vector<Pair>& pairs);

/// Reads `filename<TAB>text[<TAB>...]` lines (labels.tsv escapes) and pairs
/// every ground-truth row with the prediction for the same filename; a
/// missing prediction counts as the empty string. Throws MalformedLine,
/// ManifestMissing.
std::vector<Pair> join_prediction_files(const std::filesystem::path& pred,
                                        const std::filesystem::path& gt);

}  // namespace stgen::eval
