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

#include "bwv/lime.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "bwv/dataset.hpp"
#include "bwv/error.hpp"
#include "bwv/network.hpp"
#include "bwv/parallel.hpp"

namespace bwv {

std::size_t Segmentation::pixel_count(std::size_t feature) const {
  const std::size_t r = feature / cols, c = feature % cols;
  return (row_bounds[r + 1] - row_bounds[r]) * (col_bounds[c + 1] - col_bounds[c]);
}

Segmentation segment_grid(std::size_t height, std::size_t width, std::size_t feature_count) {
  if (feature_count == 0) throw InvalidInput("segment_grid: feature count must be >= 1");
  if (height == 0 || width == 0) throw InvalidInput("segment_grid: empty image");
  if (feature_count > height * width) {
    throw InvalidInput("segment_grid: " + std::to_string(feature_count) +
                       " features exceed the pixel count");
  }
  // Factor F = rows * cols with the cell aspect closest to the image aspect.
  const double target = std::log(static_cast<double>(width) / static_cast<double>(height));
  std::size_t rows = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 1; r <= feature_count; ++r) {
    if (feature_count % r != 0) continue;
    const std::size_t c = feature_count / r;
    if (r > height || c > width) continue;
    const double cost = std::abs(std::log(static_cast<double>(c) / static_cast<double>(r)) - target);
    if (cost < best) {
      best = cost;
      rows = r;
    }
  }
  if (rows == 0) {
    throw InvalidInput("segment_grid: " + std::to_string(feature_count) + " features do not fit a " +
                       std::to_string(height) + "x" + std::to_string(width) + " grid");
  }

  Segmentation seg;
  seg.feature_count = feature_count;
  seg.rows = rows;
  seg.cols = feature_count / rows;
  seg.height = height;
  seg.width = width;
  for (std::size_t i = 0; i <= seg.rows; ++i) seg.row_bounds.push_back(i * height / seg.rows);
  for (std::size_t i = 0; i <= seg.cols; ++i) seg.col_bounds.push_back(i * width / seg.cols);
  seg.cell_of.resize(height * width);
  for (std::size_t gr = 0; gr < seg.rows; ++gr) {
    for (std::size_t y = seg.row_bounds[gr]; y < seg.row_bounds[gr + 1]; ++y) {
      for (std::size_t gc = 0; gc < seg.cols; ++gc) {
        for (std::size_t x = seg.col_bounds[gc]; x < seg.col_bounds[gc + 1]; ++x) {
          seg.cell_of[y * width + x] = gr * seg.cols + gc;
        }
      }
    }
  }
  return seg;
}

Rgb mean_color(const ImageRGB8& image) {
  if (image.empty()) throw InvalidInput("mean_color: empty image");
  std::array<std::uint64_t, 3> sum{};
  for (const Rgb& p : image.pixels()) {
    sum[0] += p.r;
    sum[1] += p.g;
    sum[2] += p.b;
  }
  const double n = static_cast<double>(image.pixels().size());
  auto avg = [&](std::uint64_t s) {
    return static_cast<std::uint8_t>(std::lround(static_cast<double>(s) / n));
  };
  return {avg(sum[0]), avg(sum[1]), avg(sum[2])};
}

PerturbationSet perturb(const ImageRGB8& image, const Segmentation& seg, std::size_t sample_count,
                        std::uint64_t seed) {
  if (sample_count < 2) throw InvalidInput("perturb: need at least 2 samples");
  PerturbationSet set;
  set.sample_count = sample_count;
  set.feature_count = seg.feature_count;
  set.baseline = mean_color(image);
  set.masks.assign(sample_count * seg.feature_count, 1);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = seg.feature_count; i < set.masks.size(); ++i) set.masks[i] = coin(rng) ? 1 : 0;
  return set;
}

ImageRGB8 synthesize(const ImageRGB8& image, const Segmentation& seg,
                     std::span<const std::uint8_t> mask, Rgb baseline) {
  if (image.height() != seg.height || image.width() != seg.width) {
    throw InvalidInput("synthesize: segmentation does not match the image");
  }
  if (mask.size() != seg.feature_count) throw InvalidInput("synthesize: mask length mismatch");
  ImageRGB8 out = image;
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (!mask[seg.cell_of[i]]) px[i] = baseline;
  }
  return out;
}

std::vector<double> fit_surrogate(std::span<const std::uint8_t> masks, std::size_t feature_count,
                                  std::span<const double> scores, const SurrogateOptions& opts) {
  if (feature_count == 0 || masks.size() != scores.size() * feature_count) {
    throw InvalidInput("fit_surrogate: mask matrix does not match the score count");
  }
  if (scores.empty()) throw InvalidInput("fit_surrogate: no samples");
  if (!(opts.kernel_width > 0) || !(opts.ridge >= 0)) {
    throw InvalidInput("fit_surrogate: kernel width must be positive and ridge non-negative");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw InvalidInput("fit_surrogate: non-finite score");
  }
  const std::size_t n = scores.size(), f = feature_count;

  Eigen::VectorXd w(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t off = 0;
    for (std::size_t j = 0; j < f; ++j) off += masks[s * f + j] == 0;
    const double d = static_cast<double>(off) / static_cast<double>(f);
    w[s] = std::exp(-d * d / (opts.kernel_width * opts.kernel_width));
  }
  const double wsum = w.sum();

  // Weighted centering absorbs the unpenalized intercept.
  Eigen::MatrixXd x(n, f);
  Eigen::VectorXd y(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t j = 0; j < f; ++j) x(s, j) = masks[s * f + j];
    y[s] = scores[s];
  }
  const Eigen::RowVectorXd x_mean = (w.transpose() * x) / wsum;
  const double y_mean = w.dot(y) / wsum;
  x.rowwise() -= x_mean;
  y.array() -= y_mean;

  const Eigen::MatrixXd xw = x.array().colwise() * w.array();
  Eigen::MatrixXd gram = xw.transpose() * x;
  gram.diagonal().array() += opts.ridge;
  const Eigen::VectorXd rhs = xw.transpose() * y;
  Eigen::VectorXd coef = gram.ldlt().solve(rhs);
  if (!coef.allFinite()) coef = gram.completeOrthogonalDecomposition().solve(rhs);
  if (!coef.allFinite()) throw NumericError("fit_surrogate: solve produced non-finite weights");
  return {coef.data(), coef.data() + f};
}

namespace {

double keys_weight(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1) return ((a + 2) * t - (a + 3)) * t * t + 1;
  if (t < 2) return ((a * t - 5 * a) * t + 8 * a) * t - 4 * a;
  return 0;
}

// Pixel index -> fractional grid coordinate, linear between cell centers.
std::vector<double> grid_coordinates(std::span<const std::size_t> bounds, std::size_t extent) {
  const std::size_t cells = bounds.size() - 1;
  std::vector<double> centers(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    centers[k] = (static_cast<double>(bounds[k]) + static_cast<double>(bounds[k + 1]) - 1) / 2;
  }
  std::vector<double> out(extent);
  std::size_t k = 0;
  for (std::size_t p = 0; p < extent; ++p) {
    const double v = static_cast<double>(p);
    if (v <= centers.front()) {
      out[p] = 0;
    } else if (v >= centers.back()) {
      out[p] = static_cast<double>(cells - 1);
    } else {
      while (v >= centers[k + 1]) ++k;
      out[p] = static_cast<double>(k) + (v - centers[k]) / (centers[k + 1] - centers[k]);
    }
  }
  return out;
}

}  // namespace

double bicubic_sample(std::span<const double> grid, std::size_t rows, std::size_t cols, double y,
                      double x) {
  if (grid.size() != rows * cols || rows == 0) throw InvalidInput("bicubic_sample: bad grid");
  const double fy = std::floor(y), fx = std::floor(x);
  auto clamp_index = [](double i, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(i, 0.0, static_cast<double>(n - 1)));
  };
  double acc = 0;
  for (int dy = -1; dy <= 2; ++dy) {
    const double wy = keys_weight(y - (fy + dy));
    if (wy == 0) continue;
    const std::size_t r = clamp_index(fy + dy, rows);
    for (int dx = -1; dx <= 2; ++dx) {
      const double wx = keys_weight(x - (fx + dx));
      if (wx == 0) continue;
      acc += wy * wx * grid[r * cols + clamp_index(fx + dx, cols)];
    }
  }
  return acc;
}

std::vector<double> heatmap(std::span<const double> importance, const Segmentation& seg) {
  if (importance.size() != seg.feature_count) {
    throw InvalidInput("heatmap: importance length does not match the segmentation");
  }
  const auto [lo, hi] = std::minmax_element(importance.begin(), importance.end());
  const auto ys = grid_coordinates(seg.row_bounds, seg.height);
  const auto xs = grid_coordinates(seg.col_bounds, seg.width);
  std::vector<double> map(seg.height * seg.width);
  for (std::size_t y = 0; y < seg.height; ++y) {
    for (std::size_t x = 0; x < seg.width; ++x) {
      map[y * seg.width + x] =
          std::clamp(bicubic_sample(importance, seg.rows, seg.cols, ys[y], xs[x]), *lo, *hi);
    }
  }
  return map;
}

std::vector<std::size_t> rank_features(std::span<const double> importance) {
  std::vector<std::size_t> order(importance.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return importance[a] > importance[b]; });
  return order;
}

ImageRGB8 top_k_mask(const ImageRGB8& image, std::span<const double> importance,
                     const Segmentation& seg, std::size_t k) {
  if (importance.size() != seg.feature_count) {
    throw InvalidInput("top_k_mask: importance length does not match the segmentation");
  }
  if (k < 1 || k > seg.feature_count) throw InvalidInput("top_k_mask: k out of range");
  if (image.height() != seg.height || image.width() != seg.width) {
    throw InvalidInput("top_k_mask: segmentation does not match the image");
  }
  const auto order = rank_features(importance);
  std::vector<std::uint8_t> keep(seg.feature_count, 0);
  for (std::size_t i = 0; i < k; ++i) keep[order[i]] = 1;
  return synthesize(image, seg, keep, Rgb{0, 0, 0});
}

BatchScorer network_scorer(const Network& net) {
  return [&net](std::span<const ImageRGB8> images) {
    const Tensor probs = net.predict(images_to_batch(images));
    return std::vector<double>(probs.data().begin(), probs.data().end());
  };
}

Explanation explain(const ImageRGB8& image, const BatchScorer& scorer, Label explained,
                    const ExplainConfig& cfg) {
  if (cfg.chunk_size == 0) throw InvalidInput("explain: chunk size must be positive");
  Explanation ex;
  ex.explained = explained;
  ex.segmentation = segment_grid(image, cfg.feature_count);
  const PerturbationSet set = perturb(image, ex.segmentation, cfg.sample_count, cfg.seed);

  const std::size_t cls = class_index(explained);
  std::vector<double> scores(set.sample_count);
  std::vector<ImageRGB8> chunk;
  for (std::size_t start = 0; start < set.sample_count; start += cfg.chunk_size) {
    const std::size_t count = std::min(cfg.chunk_size, set.sample_count - start);
    chunk.assign(count, ImageRGB8{});
    parallel_for(count, [&](std::size_t i) {
      chunk[i] = synthesize(image, ex.segmentation, set.mask(start + i), set.baseline);
    });
    const std::vector<double> probs = scorer(chunk);
    if (probs.size() != count * kClassCount) {
      throw InvalidInput("explain: scorer returned " + std::to_string(probs.size()) +
                         " values for " + std::to_string(count) + " images");
    }
    for (std::size_t i = 0; i < count; ++i) scores[start + i] = probs[i * kClassCount + cls];
  }
  ex.probability = scores[0];  // first mask keeps every feature
  ex.importance = fit_surrogate(set.masks, set.feature_count, scores, cfg.surrogate);
  ex.heatmap = heatmap(ex.importance, ex.segmentation);
  return ex;
}

ImageRGB8 render_heatmap(const ImageRGB8& image, std::span<const double> map, double alpha) {
  if (map.size() != image.pixels().size()) throw InvalidInput("render_heatmap: size mismatch");
  double scale = 0;
  for (double v : map) scale = std::max(scale, std::abs(v));
  ImageRGB8 out = image;
  auto px = out.pixels();
  auto blend = [alpha](double color, std::uint8_t base) {
    return static_cast<std::uint8_t>(
        std::lround(std::clamp(alpha * color + (1 - alpha) * base, 0.0, 255.0)));
  };
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double t = scale > 0 ? map[i] / scale : 0;
    const double fade = 255 * (1 - std::abs(t));
    const double r = t >= 0 ? 255 : fade;
    const double b = t <= 0 ? 255 : fade;
    px[i] = {blend(r, px[i].r), blend(fade, px[i].g), blend(b, px[i].b)};
  }
  return out;
}

}  // namespace bwv
