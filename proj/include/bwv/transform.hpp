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
#include <string_view>

namespace bwv {

enum class TransformKind { Identity, Rot90, Rot180, Rot270, FlipH, FlipV, ZoomIn };

// File-name and manifest token: "identity", "rot90", ..., "zoomin".
std::string_view to_string(TransformKind kind);
std::optional<TransformKind> parse_transform(std::string_view token);

}  // namespace bwv
