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

#include "stgen/common/errors.hpp"

#include <cstdio>
#include <utility>

namespace stgen {

namespace {

std::string describe_codepoint(char32_t cp, const std::string& character) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "U+%04X", static_cast<unsigned>(cp));
  return "missing glyph for '" + character + "' (" + buf + ")";
}

}  // namespace

MissingGlyph::MissingGlyph(char32_t codepoint, const std::string& character)
    : Error(describe_codepoint(codepoint, character)), codepoint_(codepoint) {}

NonFiniteLoss::NonFiniteLoss(std::string term)
    : Error("non-finite loss term: " + term), term_(std::move(term)) {}

DanglingReference::DanglingReference(std::string filename)
    : Error("manifest references missing image: " + filename),
      filename_(std::move(filename)) {}

MalformedLine::MalformedLine(std::size_t line_no, const std::string& why)
    : Error("malformed manifest line " + std::to_string(line_no) + ": " + why),
      line_no_(line_no) {}

}  // namespace stgen
