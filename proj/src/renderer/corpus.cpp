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

#include "stgen/renderer/corpus.hpp"

#include <algorithm>
#include <fstream>

#include "stgen/common/errors.hpp"
#include "stgen/common/utf8.hpp"

namespace stgen::renderer {

TextCorpus::TextCorpus(std::vector<std::string> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.empty()) throw EmptyText("corpus entries must be nonempty");
    const auto cps = utf8::decode(e);
    charset_.append(cps);
  }
  std::sort(charset_.begin(), charset_.end());
  charset_.erase(std::unique(charset_.begin(), charset_.end()), charset_.end());
}

TextCorpus TextCorpus::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EmptyCorpus("cannot open text corpus: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return TextCorpus(std::move(lines));
}

std::string sample_random_text(const TextCorpus& corpus, LengthRange range, std::mt19937_64& rng,
                               SamplingMode mode) {
  if (corpus.empty()) throw EmptyCorpus("cannot sample from an empty corpus");
  if (range.min < 1 || range.max < range.min) {
    throw ConfigError("length range must satisfy 1 <= min <= max");
  }

  if (mode == SamplingMode::kCharacters) {
    const auto& chars = corpus.charset();
    std::uniform_int_distribution<int> len_dist(range.min, range.max);
    std::uniform_int_distribution<std::size_t> char_dist(0, chars.size() - 1);
    std::u32string out(static_cast<std::size_t>(len_dist(rng)), U' ');
    for (auto& c : out) c = chars[char_dist(rng)];
    return utf8::encode(out);
  }

  std::vector<std::size_t> admissible;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto n = static_cast<int>(utf8::length(corpus.entries()[i]));
    if (n >= range.min && n <= range.max) admissible.push_back(i);
  }
  if (admissible.empty()) {
    throw EmptyCorpus("no corpus entry has a length in [" + std::to_string(range.min) + ", " +
                      std::to_string(range.max) + "]");
  }
  std::uniform_int_distribution<std::size_t> pick(0, admissible.size() - 1);
  return corpus.entries()[admissible[pick(rng)]];
}

}  // namespace stgen::renderer
