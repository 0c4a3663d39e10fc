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
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace bwv {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Row-major H x W grid of 8-bit RGB pixels.
class ImageRGB8 {
 public:
  ImageRGB8() = default;
  ImageRGB8(std::size_t height, std::size_t width, Rgb fill = {})
      : height_(height), width_(width), pixels_(height * width, fill) {}

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  bool empty() const { return pixels_.empty(); }

  Rgb& at(std::size_t row, std::size_t col) { return pixels_[row * width_ + col]; }
  const Rgb& at(std::size_t row, std::size_t col) const {
    return pixels_[row * width_ + col];
  }

  std::span<Rgb> pixels() { return pixels_; }
  std::span<const Rgb> pixels() const { return pixels_; }

  friend bool operator==(const ImageRGB8&, const ImageRGB8&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<Rgb> pixels_;
};

// Planar float image (channel-major, C x H x W), values as given by the caller.
struct PlanarImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;  // size 3 * height * width
};

// Decodes a PNG or JPEG file. Throws DataError naming the path on failure.
ImageRGB8 read_image(const std::filesystem::path& path);

// Encodes as PNG (lossless). Throws DataError naming the path on failure.
void write_png(const ImageRGB8& image, const std::filesystem::path& path);

// Bilinear resampling with pixel-center alignment. Resizing to the same
// dimensions reproduces the input exactly.
ImageRGB8 resize_bilinear(const ImageRGB8& image, std::size_t height, std::size_t width);

// Same sampling as resize_bilinear but without re-quantization; each output
// value is divided by `divisor`.
PlanarImage resize_bilinear_planar(const ImageRGB8& image, std::size_t height,
                                   std::size_t width, float divisor);

bool is_image_file(const std::filesystem::path& path);

}  // namespace bwv
