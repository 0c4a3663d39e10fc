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

#include <optional>
#include <string>
#include <string_view>

namespace bwv {

// Binary class; BWV is the positive class everywhere. The numeric values are
// the network's output indices.
enum class Label : int { Bwv = 0, NonBwv = 1 };

inline constexpr int kClassCount = 2;

inline constexpr int class_index(Label label) { return static_cast<int>(label); }

inline std::string_view to_string(Label label) {
  return label == Label::Bwv ? "bwv" : "nonbwv";
}

// Accepts "bwv" / "nonbwv" in any letter case.
std::optional<Label> parse_label(std::string_view token);

}  // namespace bwv
