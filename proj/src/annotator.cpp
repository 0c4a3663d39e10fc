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

#include "bwv/annotator.hpp"

#include <algorithm>
#include <string>

#include "bwv/error.hpp"

namespace bwv {
namespace {

constexpr std::uint8_t kRed[80] = {
    73,  98,  83,  92,  79,  97,  85,  108, 71,  82,  80,  86,  75,  109, 89,  119,
    96,  94,  103, 125, 66,  90,  84,  117, 93,  81,  110, 138, 121, 50,  99,  139,
    95,  120, 62,  88,  137, 114, 126, 106, 118, 78,  102, 61,  87,  115, 56,  77,
    74,  136, 98,  112, 116, 75,  130, 56,  129, 124, 104, 113, 81,  92,  88,  166,
    90,  109, 131, 79,  101, 114, 61,  108, 46,  161, 110, 111, 132, 91,  121, 135};

// The first 50 entries sit on the 73 floor in green and blue, the rest on
// the 98 ceiling.
constexpr std::array<Rgb, 80> make_palette() {
  std::array<Rgb, 80> out{};
  for (std::size_t i = 0; i < 80; ++i) {
    const std::uint8_t gb = i < 50 ? 73 : 98;
    out[i] = Rgb{kRed[i], gb, gb};
  }
  return out;
}

constexpr std::array<Rgb, 80> kPalette = make_palette();

}  // namespace

void ColorRange::validate() const {
  const int bounds[3][2] = {{r_min, r_max}, {g_min, g_max}, {b_min, b_max}};
  for (const auto& [lo, hi] : bounds) {
    if (lo < 0 || hi > 255 || lo > hi) {
      throw InvalidInput("color range bounds must satisfy 0 <= min <= max <= 255");
    }
  }
}

std::span<const Rgb, 80> reference_palette() { return kPalette; }

std::size_t PatchGrid::flagged_count() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
}

std::vector<std::pair<std::size_t, std::size_t>> PatchGrid::flagged_patches() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (flagged(r, c)) out.emplace_back(r, c);
    }
  }
  return out;
}

PatchGrid scan_patches(const ImageRGB8& image, const ColorRange& range,
                       std::size_t patch_size, std::size_t min_pixels) {
  if (image.empty()) throw InvalidInput("scan_patches: empty image");
  if (patch_size < 1) throw InvalidInput("scan_patches: patch size must be >= 1");
  if (min_pixels < 1) throw InvalidInput("scan_patches: min_pixels must be >= 1");
  range.validate();

  PatchGrid grid;
  grid.patch_size = patch_size;
  grid.rows = (image.height() + patch_size - 1) / patch_size;
  grid.cols = (image.width() + patch_size - 1) / patch_size;
  grid.hit_counts.assign(grid.rows * grid.cols, 0);
  for (std::size_t y = 0; y < image.height(); ++y) {
    const std::size_t prow = y / patch_size;
    for (std::size_t x = 0; x < image.width(); ++x) {
      if (pixel_in_range(image.at(y, x), range)) {
        ++grid.hit_counts[prow * grid.cols + x / patch_size];
      }
    }
  }
  grid.flags.resize(grid.hit_counts.size());
  for (std::size_t i = 0; i < grid.hit_counts.size(); ++i) {
    grid.flags[i] = grid.hit_counts[i] >= min_pixels;
  }
  return grid;
}

AnnotationResult classify_image(const ImageRGB8& image, const ColorRange& range,
                                const ScanOptions& options) {
  if (options.min_patches < 1) throw InvalidInput("classify_image: min_patches must be >= 1");
  AnnotationResult result;
  result.grid = scan_patches(image, range, options.patch_size, options.min_pixels);
  result.label = result.grid.flagged_count() >= options.min_patches ? Label::Bwv
                                                                    : Label::NonBwv;
  for (const Rgb& p : image.pixels()) {
    if (!pixel_in_range(p, range)) continue;
    const int v[3] = {p.r, p.g, p.b};
    if (!result.rgb_extrema) {
      result.rgb_extrema = ChannelExtrema{{v[0], v[1], v[2]}, {v[0], v[1], v[2]}};
      continue;
    }
    for (int ch = 0; ch < 3; ++ch) {
      result.rgb_extrema->min[ch] = std::min(result.rgb_extrema->min[ch], v[ch]);
      result.rgb_extrema->max[ch] = std::max(result.rgb_extrema->max[ch], v[ch]);
    }
  }
  return result;
}

ImageRGB8 render_overlay(const ImageRGB8& image, const PatchGrid& grid) {
  const std::size_t ps = grid.patch_size;
  if (ps == 0 || grid.rows != (image.height() + ps - 1) / ps ||
      grid.cols != (image.width() + ps - 1) / ps ||
      grid.flags.size() != grid.rows * grid.cols) {
    throw InvalidInput("render_overlay: patch grid does not match image dimensions");
  }
  constexpr Rgb kMark{255, 0, 0};
  ImageRGB8 out = image;
  for (const auto& [pr, pc] : grid.flagged_patches()) {
    const std::size_t top = pr * ps;
    const std::size_t left = pc * ps;
    const std::size_t bottom = std::min(top + ps, image.height()) - 1;
    const std::size_t right = std::min(left + ps, image.width()) - 1;
    for (std::size_t x = left; x <= right; ++x) {
      out.at(top, x) = kMark;
      out.at(bottom, x) = kMark;
    }
    for (std::size_t y = top; y <= bottom; ++y) {
      out.at(y, left) = kMark;
      out.at(y, right) = kMark;
    }
  }
  return out;
}

ConfusionMatrix score_agreement(std::span<const Label> predicted,
                                std::span<const Label> reference) {
  return tally(predicted, reference);
}

}  // namespace bwv
