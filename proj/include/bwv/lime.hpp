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
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bwv/image.hpp"
#include "bwv/label.hpp"

namespace bwv {

class Network;

// Rectangular grid partition of an image into feature cells. Feature id of
// grid cell (row, col) is row * cols + col.
struct Segmentation {
  std::size_t feature_count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_bounds;  // rows + 1 entries, floor(i * H / rows)
  std::vector<std::size_t> col_bounds;  // cols + 1 entries
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::size_t> cell_of;  // per pixel, row-major

  std::size_t id_at(std::size_t row, std::size_t col) const { return cell_of[row * width + col]; }
  std::size_t pixel_count(std::size_t feature) const;
};

// Throws InvalidInput for feature_count 0, more features than pixels, or a
// count that cannot be laid out as a grid on this image.
Segmentation segment_grid(std::size_t height, std::size_t width, std::size_t feature_count);
inline Segmentation segment_grid(const ImageRGB8& image, std::size_t feature_count) {
  return segment_grid(image.height(), image.width(), feature_count);
}

struct PerturbationSet {
  std::size_t sample_count = 0;
  std::size_t feature_count = 0;
  std::vector<std::uint8_t> masks;  // sample_count x feature_count, row-major; 1 keeps the feature
  Rgb baseline;

  std::span<const std::uint8_t> mask(std::size_t s) const {
    return std::span<const std::uint8_t>(masks).subspan(s * feature_count, feature_count);
  }
};

// Per-channel mean, rounded to the nearest integer.
Rgb mean_color(const ImageRGB8& image);

PerturbationSet perturb(const ImageRGB8& image, const Segmentation& seg, std::size_t sample_count,
                        std::uint64_t seed);

ImageRGB8 synthesize(const ImageRGB8& image, const Segmentation& seg,
                     std::span<const std::uint8_t> mask, Rgb baseline);

struct SurrogateOptions {
  double kernel_width = 0.25;
  double ridge = 1e-3;
};

// Weighted ridge regression of scores on masks; returns one coefficient per
// feature. The intercept is fitted but not penalized or returned.
std::vector<double> fit_surrogate(std::span<const std::uint8_t> masks, std::size_t feature_count,
                                  std::span<const double> scores, const SurrogateOptions& opts = {});

// Keys cubic convolution (a = -0.5) on a rows x cols grid at fractional
// coordinates, edges replicated. Integer coordinates return the node value.
double bicubic_sample(std::span<const double> grid, std::size_t rows, std::size_t cols, double y,
                      double x);

// Row-major height x width map.
std::vector<double> heatmap(std::span<const double> importance, const Segmentation& seg);

ImageRGB8 top_k_mask(const ImageRGB8& image, std::span<const double> importance,
                     const Segmentation& seg, std::size_t k);

// Features ordered by descending importance, ties by lower id.
std::vector<std::size_t> rank_features(std::span<const double> importance);

// Maps images to per-class probabilities (kClassCount per image, row-major).
using BatchScorer = std::function<std::vector<double>(std::span<const ImageRGB8>)>;

BatchScorer network_scorer(const Network& net);

struct ExplainConfig {
  std::size_t feature_count = 100;
  std::size_t sample_count = 5500;
  std::uint64_t seed = 0;
  SurrogateOptions surrogate;
  std::size_t chunk_size = 64;
};

struct Explanation {
  Label explained;
  Segmentation segmentation;
  std::vector<double> importance;
  std::vector<double> heatmap;
  double probability = 0;  // explained-class probability on the unperturbed image
};

Explanation explain(const ImageRGB8& image, const BatchScorer& scorer, Label explained,
                    const ExplainConfig& cfg);

// Diverging blue-white-red rendering of a heatmap (red = positive), blended
// with the image at `alpha`.
ImageRGB8 render_heatmap(const ImageRGB8& image, std::span<const double> map, double alpha = 0.6);

}  // namespace bwv
