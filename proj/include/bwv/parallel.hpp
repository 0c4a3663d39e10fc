// Copyright 2026 The bwv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>

namespace bwv {

// Worker cap shared by every parallel loop in the library. Defaults to the
// hardware concurrency; 0 is treated as 1.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

// Runs body(i) for i in [0, count). Each index is executed exactly once and
// callers only ever write to index-disjoint outputs, so results do not depend
// on the number of workers.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace bwv
