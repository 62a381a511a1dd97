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

#include "stgen/common/trace.hpp"

#include <algorithm>

namespace stgen {

namespace {
thread_local ComputationTrace* active_trace = nullptr;
}

bool ComputationTrace::contains(const std::string& event) const {
  return std::find(events_.begin(), events_.end(), event) != events_.end();
}

TraceScope::TraceScope(ComputationTrace* trace) : previous_(active_trace) {
  active_trace = trace;
}

TraceScope::~TraceScope() { active_trace = previous_; }

void trace_event(const char* event) {
  if (active_trace) active_trace->record(event);
}

}  // namespace stgen
