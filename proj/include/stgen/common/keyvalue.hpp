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

// Flat "key = value" text: one pair per line, '#' starts a comment, blank
// lines ignored. Config structs expose their fields through a
// `for_each_field(f)` member that calls f(name, member_ref) per field.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "stgen/common/errors.hpp"

namespace stgen {

using KeyValues = std::map<std::string, std::string>;

/// Throws ConfigError naming the line on malformed input or duplicate keys.
KeyValues parse_key_values(std::string_view text);

std::string format_value(std::int64_t v);
std::string format_value(double v);
std::string format_value(bool v);
inline std::string format_value(const std::string& v) { return v; }

/// Throws ConfigError when `text` does not parse as the target type.
void parse_value(std::string_view key, const std::string& text, std::int64_t& out);
void parse_value(std::string_view key, const std::string& text, double& out);
void parse_value(std::string_view key, const std::string& text, bool& out);
inline void parse_value(std::string_view, const std::string& text, std::string& out) {
  out = text;
}

/// Canonical "key=value\n" listing in field order; used for fingerprints.
template <class Config>
std::string describe_fields(const Config& config) {
  std::string out;
  const_cast<Config&>(config).for_each_field([&](std::string_view name, auto& value) {
    out.append(name).append("=").append(format_value(value)).append("\n");
  });
  return out;
}

/// Applies every known key; returns the number of keys consumed. Unknown
/// keys are left in `kv` for the caller to reject or forward.
template <class Config>
std::size_t apply_fields(Config& config, KeyValues& kv) {
  std::size_t used = 0;
  config.for_each_field([&](std::string_view name, auto& value) {
    auto it = kv.find(std::string(name));
    if (it == kv.end()) return;
    parse_value(name, it->second, value);
    kv.erase(it);
    ++used;
  });
  return used;
}

}  // namespace stgen
