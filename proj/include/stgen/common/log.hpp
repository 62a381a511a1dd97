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

#include <sstream>
#include <string>

namespace stgen::log {

enum class Level { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3 };

/// Messages below the threshold are dropped. Initialized from STGEN_LOG
/// (debug, info, warn, error); defaults to info.
void set_level(Level level);
Level level();

/// Writes one timestamped line to stderr. Thread-safe.
void write(Level level, const std::string& message);

template <class... Args>
void emit(Level lvl, const Args&... args) {
  if (lvl < level()) return;
  std::ostringstream os;
  (os << ... << args);
  write(lvl, os.str());
}

template <class... Args>
void info(const Args&... args) { emit(Level::kInfo, args...); }
template <class... Args>
void warn(const Args&... args) { emit(Level::kWarn, args...); }
template <class... Args>
void debug(const Args&... args) { emit(Level::kDebug, args...); }

}  // namespace stgen::log
