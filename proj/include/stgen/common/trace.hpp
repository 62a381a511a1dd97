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

#include <string>
#include <vector>

namespace stgen {

/// Records which optional branches a forward pass executed. Activated per
/// thread with TraceScope; recording is a no-op when no scope is active.
class ComputationTrace {
 public:
  void record(std::string event) { events_.push_back(std::move(event)); }
  const std::vector<std::string>& events() const { return events_; }
  bool contains(const std::string& event) const;
  void clear() { events_.clear(); }

 private:
  std::vector<std::string> events_;
};

class TraceScope {
 public:
  explicit TraceScope(ComputationTrace* trace);
  ~TraceScope();
  TraceScope(const TraceScope&) = delete;
  TraceScope& operator=(const TraceScope&) = delete;

 private:
  ComputationTrace* previous_;
};

void trace_event(const char* event);

}  // namespace stgen
