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

#include "bwv/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "bwv/error.hpp"
#include "bwv/parallel.hpp"

namespace bwv {

namespace {

std::uint8_t jitter(std::mt19937_64& rng, int center, int spread, int lo, int hi) {
  std::uniform_int_distribution<int> d(-spread, spread);
  return static_cast<std::uint8_t>(std::clamp(center + d(rng), lo, hi));
}

ImageRGB8 make_image(std::size_t size, bool bwv, std::mt19937_64& rng) {
  // Background stays out of range: green and blue well above 98.
  ImageRGB8 img(size, size);
  for (Rgb& p : img.pixels()) {
    p = {jitter(rng, 215, 10, 0, 255), jitter(rng, 165, 10, 140, 255), jitter(rng, 140, 10, 115, 255)};
  }
  std::uniform_int_distribution<int> blob_count(1, 3);
  const double s = static_cast<double>(size);
  std::uniform_real_distribution<double> center(0.2 * s, 0.8 * s);
  std::uniform_real_distribution<double> radius(s / 10, s / 5);
  const int blobs = blob_count(rng);
  for (int b = 0; b < blobs; ++b) {
    const double cy = center(rng), cx = center(rng), ry = radius(rng), rx = radius(rng);
    for (std::size_t y = 0; y < size; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        const double dy = (static_cast<double>(y) - cy) / ry, dx = (static_cast<double>(x) - cx) / rx;
        if (dy * dy + dx * dx > 1) continue;
        Rgb& p = img.at(y, x);
        if (bwv) {
          p = {jitter(rng, 110, 25, 50, 160), jitter(rng, 85, 8, 75, 96), jitter(rng, 88, 8, 75, 96)};
        } else {
          // Brown: blue capped at 65, below the range floor.
          p = {jitter(rng, 130, 20, 90, 170), jitter(rng, 80, 10, 60, 100), jitter(rng, 45, 12, 20, 65)};
        }
      }
    }
  }
  return img;
}

}  // namespace

std::vector<SynthSample> synth_images(const SynthOptions& opts) {
  if (opts.size == 0) throw InvalidInput("synth: image size must be positive");
  if (!(opts.bwv_fraction >= 0 && opts.bwv_fraction <= 1)) {
    throw InvalidInput("synth: bwv fraction must lie in [0, 1]");
  }
  const auto bwv_count =
      static_cast<std::size_t>(std::llround(opts.bwv_fraction * static_cast<double>(opts.count)));
  std::vector<SynthSample> out(opts.count);
  parallel_for(opts.count, [&](std::size_t i) {
    std::mt19937_64 rng(opts.seed ^ ((i + 1) * 0x9E3779B97F4A7C15ULL));
    char stem[32];
    std::snprintf(stem, sizeof stem, "synth_%03zu", i);
    const bool bwv = i < bwv_count;
    out[i] = {stem, bwv ? Label::Bwv : Label::NonBwv, make_image(opts.size, bwv, rng)};
  });
  return out;
}

void write_synth(const std::vector<SynthSample>& samples, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream labels(dir / "labels.csv", std::ios::trunc);
  if (!labels) throw DataError("cannot write " + (dir / "labels.csv").string());
  labels << "stem,label\n";
  for (const auto& s : samples) {
    write_png(s.image, dir / (s.stem + ".png"));
    labels << s.stem << ',' << to_string(s.label) << '\n';
  }
}

}  // namespace bwv
