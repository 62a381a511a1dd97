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

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles/edit_distance.hpp"
#include "stgen/common/errors.hpp"
#include "stgen/common/utf8.hpp"
#include "stgen/eval/metrics.hpp"

using namespace stgen;
using namespace stgen::eval;

namespace {

std::u32string random_word(std::mt19937_64& rng, std::size_t max_len, const std::u32string& alphabet) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::u32string s(len(rng), U' ');
  for (auto& c : s) c = alphabet[pick(rng)];
  return s;
}

}  // namespace

TEST_CASE("levenshtein examples") {
  CHECK(levenshtein("", "") == 0);
  CHECK(levenshtein("abc", "abd") == 1);
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("", "abc") == 3);
  // Code points, not bytes: one substitution of a two-byte letter.
  CHECK(levenshtein("сәлем", "салем") == 1);
  CHECK(levenshtein("한국", "한극") == 1);
  CHECK_THROWS_AS(levenshtein("\xff", "a"), InvalidUtf8);
}

TEST_CASE("levenshtein matches the memoized recursion") {
  std::mt19937_64 rng(0);
  const std::u32string alphabet = U"abcdə";
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_word(rng, 12, alphabet);
    const auto b = random_word(rng, 12, alphabet);
    REQUIRE(levenshtein(utf8::encode(a), utf8::encode(b)) == oracle::edit_distance(a, b));
  }
}

TEST_CASE("levenshtein is a metric") {
  std::mt19937_64 rng(1);
  const std::u32string alphabet = U"xyz";
  for (int i = 0; i < 300; ++i) {
    const auto a = random_word(rng, 8, alphabet);
    const auto b = random_word(rng, 8, alphabet);
    const auto c = random_word(rng, 8, alphabet);
    CHECK(levenshtein(a, b) == levenshtein(b, a));
    CHECK((levenshtein(a, b) == 0) == (a == b));
    CHECK(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
  }
}

TEST_CASE("normalized edit distance") {
  CHECK(normalized_edit_distance("abc", "abc") == 1.0);
  CHECK(normalized_edit_distance("", "a") == 0.0);
  CHECK(normalized_edit_distance("abc", "abd") == doctest::Approx(1.0 - 1.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(normalized_edit_distance("abc", "abd") - 2.0 / 3.0) <= 1e-9);
  CHECK_THROWS_AS(normalized_edit_distance("", ""), BothEmpty);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 300; ++i) {
    const auto p = utf8::encode(random_word(rng, 6, U"ab"));
    const auto g = utf8::encode(random_word(rng, 6, U"ab"));
    if (p.empty() && g.empty()) continue;
    const double v = normalized_edit_distance(p, g);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK((v == 1.0) == (p == g));
  }
}

TEST_CASE("evaluate") {
  const auto same = evaluate({{"a", "a"}, {"bc", "bc"}});
  CHECK(same.accuracy == 1.0);
  CHECK(same.mean_norm_ed == 1.0);
  CHECK(same.n == 2);
  const auto half = evaluate({{"a", "a"}, {"b", "c"}});
  CHECK(half.accuracy == 0.5);
  CHECK(half.mean_norm_ed == 0.5);
  CHECK(evaluate({{"x", "y"}}).n == 1);
  CHECK_THROWS_AS(evaluate({}), EmptyInput);
  CHECK(half.to_string() == "n=2 accuracy=0.500000 mean_norm_ed=0.500000");
}

TEST_CASE("prediction files join on filename") {
  const auto dir = std::filesystem::temp_directory_path() / "stgen_eval_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "pred.tsv") << "b.png\tabd\na.png\tabc\n";
  std::ofstream(dir / "gt.tsv") << "a.png\tabc\t0\nb.png\tabc\t0\nc.png\tq\t1\n";
  const auto pairs = join_prediction_files(dir / "pred.tsv", dir / "gt.tsv");
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0] == Pair{"abc", "abc"});
  CHECK(pairs[1] == Pair{"abd", "abc"});
  CHECK(pairs[2] == Pair{"", "q"});
  const auto report = evaluate(pairs);
  CHECK(report.accuracy == doctest::Approx(1.0 / 3.0));
  CHECK(report.mean_norm_ed == doctest::Approx((1.0 + 2.0 / 3.0 + 0.0) / 3.0));
  std::ofstream(dir / "bad.tsv") << "no tab here\n";
  CHECK_THROWS_AS(join_prediction_files(dir / "bad.tsv", dir / "gt.tsv"), MalformedLine);
  CHECK_THROWS_AS(join_prediction_files(dir / "missing.tsv", dir / "gt.tsv"), ManifestMissing);
  std::filesystem::remove_all(dir);
}
