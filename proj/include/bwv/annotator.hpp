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

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bwv/image.hpp"
#include "bwv/label.hpp"
#include "bwv/metrics.hpp"

namespace bwv {

// Axis-aligned RGB box. The defaults span the reference veil palette.
struct ColorRange {
  int r_min = 45;
  int r_max = 166;
  int g_min = 73;
  int g_max = 98;
  int b_min = 73;
  int b_max = 98;

  // Throws InvalidInput if any bound leaves [0, 255] or min > max.
  void validate() const;

  friend bool operator==(const ColorRange&, const ColorRange&) = default;
};

// The 80 reference veil colors, in table order.
std::span<const Rgb, 80> reference_palette();

constexpr bool pixel_in_range(Rgb p, const ColorRange& range) {
  return range.r_min <= p.r && p.r <= range.r_max && range.g_min <= p.g &&
         p.g <= range.g_max && range.b_min <= p.b && p.b <= range.b_max;
}

struct ScanOptions {
  std::size_t patch_size = 16;
  std::size_t min_pixels = 1;   // in-range pixels needed to flag a patch
  std::size_t min_patches = 1;  // flagged patches needed to call the image BWV
};

// Patch tiling of one image; the last row/column of patches may be partial.
struct PatchGrid {
  std::size_t patch_size = 16;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<bool> flags;               // row-major, rows * cols
  std::vector<std::size_t> hit_counts;   // row-major, rows * cols

  bool flagged(std::size_t row, std::size_t col) const { return flags[row * cols + col]; }
  std::size_t flagged_count() const;
  std::vector<std::pair<std::size_t, std::size_t>> flagged_patches() const;
};

struct ChannelExtrema {
  std::array<int, 3> min{};  // r, g, b
  std::array<int, 3> max{};

  friend bool operator==(const ChannelExtrema&, const ChannelExtrema&) = default;
};

struct AnnotationResult {
  Label label = Label::NonBwv;
  PatchGrid grid;
  std::optional<ChannelExtrema> rgb_extrema;  // over in-range pixels only
};

PatchGrid scan_patches(const ImageRGB8& image, const ColorRange& range,
                       std::size_t patch_size = 16, std::size_t min_pixels = 1);

AnnotationResult classify_image(const ImageRGB8& image, const ColorRange& range,
                                const ScanOptions& options = {});

// Draws a one-pixel pure red border around every flagged patch.
ImageRGB8 render_overlay(const ImageRGB8& image, const PatchGrid& grid);

// Agreement of the annotator with reference labels, BWV positive.
ConfusionMatrix score_agreement(std::span<const Label> predicted,
                                std::span<const Label> reference);

}  // namespace bwv
