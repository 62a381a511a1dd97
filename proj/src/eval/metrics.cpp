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

#include "stgen/eval/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "stgen/common/errors.hpp"
#include "stgen/common/utf8.hpp"
#include "stgen/datagen/dataset.hpp"

namespace stgen::eval {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t substitute = prev[j - 1] + (a[i - 1] != b[j - 1]);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(utf8::decode(a), utf8::decode(b));
}

double normalized_edit_distance(std::string_view pred, std::string_view gt) {
  const auto p = utf8::decode(pred);
  const auto g = utf8::decode(gt);
  if (p.empty() && g.empty()) throw BothEmpty("normalized edit distance of two empty strings");
  const auto longest = std::max(p.size(), g.size());
  return 1.0 - static_cast<double>(levenshtein(p, g)) / static_cast<double>(longest);
}

std::string EvalReport::to_string() const {
  char buffer[128];
  std::snprintf(buffer, sizeof buffer, "n=%zu accuracy=%.6f mean_norm_ed=%.6f", n, accuracy,
                mean_norm_ed);
  return buffer;
}

EvalReport evaluate(const std::vector<Pair>& pairs) {
  if (pairs.empty()) throw EmptyInput("no prediction/ground-truth pairs to evaluate");
  EvalReport report;
  report.n = pairs.size();
  double matches = 0.0, ned = 0.0;
  for (const auto& [pred, gt] : pairs) {
    const bool equal = pred == gt;
    matches += equal;
    ned += equal ? 1.0 : normalized_edit_distance(pred, gt);
  }
  report.accuracy = matches / static_cast<double>(report.n);
  report.mean_norm_ed = ned / static_cast<double>(report.n);
  return report;
}

namespace {

std::vector<std::pair<std::string, std::string>> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestMissing("cannot read " + path.string());
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw MalformedLine(line_no, "expected filename<TAB>text in " + path.string());
    }
    const auto end = line.find('\t', tab + 1);
    const auto text = std::string_view(line).substr(
        tab + 1, end == std::string::npos ? std::string::npos : end - tab - 1);
    rows.emplace_back(datagen::unescape_field(std::string_view(line).substr(0, tab), line_no),
                      datagen::unescape_field(text, line_no));
  }
  return rows;
}

}  // namespace

std::vector<Pair> join_prediction_files(const std::filesystem::path& pred,
                                        const std::filesystem::path& gt) {
  std::map<std::string, std::string> predictions;
  for (auto& [name, text] : read_rows(pred)) predictions[name] = std::move(text);
  std::vector<Pair> pairs;
  for (auto& [name, text] : read_rows(gt)) {
    const auto it = predictions.find(name);
    pairs.emplace_back(it == predictions.end() ? std::string() : it->second, std::move(text));
  }
  return pairs;
}

}  // namespace stgen::eval
