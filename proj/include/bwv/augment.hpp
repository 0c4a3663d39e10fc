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
#include <filesystem>

#include "bwv/dataset.hpp"
#include "bwv/image.hpp"
#include "bwv/transform.hpp"

namespace bwv {

struct Transform {
  TransformKind kind = TransformKind::Identity;
  double zoom_factor = 1.25;  // ZoomIn only; must exceed 1
};

// Rotations are clockwise. Rotations and flips permute pixels exactly;
// ZoomIn crops the centered floor(H/z) x floor(W/z) window and resizes it
// back to H x W bilinearly.
ImageRGB8 apply_transform(const ImageRGB8& image, const Transform& t);

// Entries produced by augment_dataset for `originals` inputs:
// the originals, five rotation/flip copies each, and zoom copies for the
// first half (rounded up).
constexpr std::size_t augmented_count(std::size_t originals) {
  return originals * 6 + (originals + 1) / 2;
}

struct AugmentOptions {
  std::filesystem::path out_dir;
  double zoom_factor = 1.25;
};

// For every entry, in manifest order: the entry itself, then Rot90, Rot180,
// Rot270, FlipH and FlipV copies, then a ZoomIn copy for the first
// ceil(N/2) entries. Copies are written to out_dir as <id>__<transform>.png
// and inherit the source label.
DatasetManifest augment_dataset(const DatasetManifest& manifest, const AugmentOptions& options);

}  // namespace bwv
