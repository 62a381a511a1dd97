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

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace stgen::renderer {

/// Nonempty UTF-8 strings plus the set of code points they use.
class TextCorpus {
 public:
  TextCorpus() = default;
  /// Throws EmptyText if any entry is empty, InvalidUtf8 on bad encoding.
  explicit TextCorpus(std::vector<std::string> entries);

  /// One entry per nonempty line; trailing '\r' stripped.
  static TextCorpus from_file(const std::filesystem::path& path);

  const std::vector<std::string>& entries() const { return entries_; }
  /// Sorted, unique.
  const std::u32string& charset() const { return charset_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::string> entries_;
  std::u32string charset_;
};

enum class SamplingMode { kEntries, kCharacters };

struct LengthRange {
  int min = 1;
  int max = 1;
};

/// Draws a random string with code-point length in [range.min, range.max].
/// kEntries picks uniformly among admissible corpus entries; kCharacters
/// draws a uniform length then uniform characters from the charset.
/// Throws EmptyCorpus (also when no entry is admissible) or ConfigError.
std::string sample_random_text(const TextCorpus& corpus, LengthRange range, std::mt19937_64& rng,
                               SamplingMode mode = SamplingMode::kEntries);

}  // namespace stgen::renderer
