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

#include "bwv/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "bwv/error.hpp"

namespace bwv {
namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

// Source coordinates for each destination index, half-pixel aligned and
// clamped at the borders.
std::vector<Tap> bilinear_taps(std::size_t src, std::size_t dst) {
  std::vector<Tap> taps(dst);
  const double ratio = static_cast<double>(src) / static_cast<double>(dst);
  for (std::size_t i = 0; i < dst; ++i) {
    double pos = (static_cast<double>(i) + 0.5) * ratio - 0.5;
    pos = std::clamp(pos, 0.0, static_cast<double>(src - 1));
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, src - 1);
    taps[i] = {lo, hi, pos - static_cast<double>(lo)};
  }
  return taps;
}

template <typename Sink>
void sample_bilinear(const ImageRGB8& image, std::size_t height, std::size_t width,
                     Sink&& sink) {
  if (image.empty() || height == 0 || width == 0) {
    throw InvalidInput("resize: empty source or target dimensions");
  }
  const auto rows = bilinear_taps(image.height(), height);
  const auto cols = bilinear_taps(image.width(), width);
  for (std::size_t y = 0; y < height; ++y) {
    const Tap& ty = rows[y];
    for (std::size_t x = 0; x < width; ++x) {
      const Tap& tx = cols[x];
      const Rgb& p00 = image.at(ty.lo, tx.lo);
      const Rgb& p01 = image.at(ty.lo, tx.hi);
      const Rgb& p10 = image.at(ty.hi, tx.lo);
      const Rgb& p11 = image.at(ty.hi, tx.hi);
      auto mix = [&](std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
        const double top = a + (b - a) * tx.frac;
        const double bottom = c + (d - c) * tx.frac;
        return top + (bottom - top) * ty.frac;
      };
      sink(y, x, mix(p00.r, p01.r, p10.r, p11.r), mix(p00.g, p01.g, p10.g, p11.g),
           mix(p00.b, p01.b, p10.b, p11.b));
    }
  }
}

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

}  // namespace

ImageRGB8 read_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw DataError("cannot decode image: " + path.string());
  if (bgr.type() != CV_8UC3) {
    throw DataError("unsupported pixel format: " + path.string());
  }
  ImageRGB8 out(static_cast<std::size_t>(bgr.rows), static_cast<std::size_t>(bgr.cols));
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      out.at(y, x) = Rgb{row[x][2], row[x][1], row[x][0]};
    }
  }
  return out;
}

void write_png(const ImageRGB8& image, const std::filesystem::path& path) {
  if (image.empty()) throw InvalidInput("write_png: empty image");
  cv::Mat bgr(static_cast<int>(image.height()), static_cast<int>(image.width()), CV_8UC3);
  for (int y = 0; y < bgr.rows; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      const Rgb& p = image.at(y, x);
      row[x] = cv::Vec3b(p.b, p.g, p.r);
    }
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw DataError("cannot write image: " + path.string());
}

ImageRGB8 resize_bilinear(const ImageRGB8& image, std::size_t height, std::size_t width) {
  if (image.height() == height && image.width() == width) return image;
  ImageRGB8 out(height, width);
  sample_bilinear(image, height, width,
                  [&](std::size_t y, std::size_t x, double r, double g, double b) {
                    out.at(y, x) = Rgb{to_u8(r), to_u8(g), to_u8(b)};
                  });
  return out;
}

PlanarImage resize_bilinear_planar(const ImageRGB8& image, std::size_t height,
                                   std::size_t width, float divisor) {
  PlanarImage out{height, width, std::vector<float>(3 * height * width)};
  const std::size_t plane = height * width;
  sample_bilinear(image, height, width,
                  [&](std::size_t y, std::size_t x, double r, double g, double b) {
                    const std::size_t i = y * width + x;
                    out.data[i] = static_cast<float>(r) / divisor;
                    out.data[plane + i] = static_cast<float>(g) / divisor;
                    out.data[2 * plane + i] = static_cast<float>(b) / divisor;
                  });
  return out;
}

bool is_image_file(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace bwv
