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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bwv/augment.hpp"
#include "bwv/error.hpp"
#include "support/tempdir.hpp"

using namespace bwv;

namespace {

// Every pixel carries its own coordinates so permutations are traceable.
ImageRGB8 labeled_grid(std::size_t h, std::size_t w) {
  ImageRGB8 img(h, w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      img.at(r, c) = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(c), 7};
  return img;
}

ImageRGB8 random_image(std::mt19937_64& rng, std::size_t h, std::size_t w) {
  ImageRGB8 img(h, w);
  for (Rgb& p : img.pixels()) {
    p = {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
         static_cast<std::uint8_t>(rng())};
  }
  return img;
}

ImageRGB8 apply(const ImageRGB8& img, TransformKind k) { return apply_transform(img, {k}); }

std::vector<std::uint32_t> sorted_pixels(const ImageRGB8& img) {
  std::vector<std::uint32_t> v;
  for (const Rgb& p : img.pixels()) v.push_back(p.r << 16 | p.g << 8 | p.b);
  std::sort(v.begin(), v.end());
  return v;
}

// Reference bilinear sampler: destination pixel centers mapped onto source
// pixel centers, clamped at the edges, rounded half up.
ImageRGB8 reference_resize(const ImageRGB8& src, std::size_t h, std::size_t w) {
  ImageRGB8 out(h, w);
  auto coord = [](std::size_t i, std::size_t s, std::size_t d) {
    const double p = (i + 0.5) * static_cast<double>(s) / static_cast<double>(d) - 0.5;
    return std::clamp(p, 0.0, static_cast<double>(s - 1));
  };
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double sy = coord(y, src.height(), h), sx = coord(x, src.width(), w);
      const auto y0 = static_cast<std::size_t>(sy), x0 = static_cast<std::size_t>(sx);
      const std::size_t y1 = std::min(y0 + 1, src.height() - 1);
      const std::size_t x1 = std::min(x0 + 1, src.width() - 1);
      const double fy = sy - y0, fx = sx - x0;
      auto ch = [&](auto get) {
        const double v = (1 - fy) * ((1 - fx) * get(src.at(y0, x0)) + fx * get(src.at(y0, x1))) +
                         fy * ((1 - fx) * get(src.at(y1, x0)) + fx * get(src.at(y1, x1)));
        return static_cast<std::uint8_t>(std::floor(v + 0.5));
      };
      out.at(y, x) = {ch([](Rgb p) { return double(p.r); }), ch([](Rgb p) { return double(p.g); }),
                      ch([](Rgb p) { return double(p.b); })};
    }
  }
  return out;
}

}  // namespace

TEST_CASE("rotation by a quarter turn moves (r,c) to (c, H-1-r)") {
  const ImageRGB8 img = labeled_grid(2, 3);
  const ImageRGB8 out = apply(img, TransformKind::Rot90);
  REQUIRE(out.height() == 3);
  REQUIRE(out.width() == 2);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(out.at(c, 2 - 1 - r) == img.at(r, c));
}

TEST_CASE("rotations and flips are exact permutations") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const ImageRGB8 img = random_image(rng, 1 + rng() % 13, 1 + rng() % 13);
    const auto pixels = sorted_pixels(img);
    for (auto k : {TransformKind::Rot90, TransformKind::Rot180, TransformKind::Rot270,
                   TransformKind::FlipH, TransformKind::FlipV}) {
      const ImageRGB8 out = apply(img, k);
      CHECK(sorted_pixels(out) == pixels);
      const bool swaps = k == TransformKind::Rot90 || k == TransformKind::Rot270;
      CHECK(out.height() == (swaps ? img.width() : img.height()));
    }
    CHECK(apply(apply(img, TransformKind::Rot180), TransformKind::Rot180) == img);
    CHECK(apply(apply(img, TransformKind::FlipH), TransformKind::FlipH) == img);
    CHECK(apply(apply(img, TransformKind::FlipV), TransformKind::FlipV) == img);
    CHECK(apply(apply(img, TransformKind::Rot90), TransformKind::Rot270) == img);
    CHECK(apply(apply(img, TransformKind::Rot90), TransformKind::Rot90) ==
          apply(img, TransformKind::Rot180));
    CHECK(apply(apply(img, TransformKind::FlipH), TransformKind::FlipV) ==
          apply(img, TransformKind::Rot180));
    CHECK(apply(img, TransformKind::Identity) == img);
  }
  const ImageRGB8 g = labeled_grid(3, 4);
  CHECK(apply(g, TransformKind::FlipH).at(0, 0) == g.at(0, 3));
  CHECK(apply(g, TransformKind::FlipV).at(0, 0) == g.at(2, 0));
}

TEST_CASE("zoom crops the centre and resizes back") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t h = 5 + rng() % 30, w = 5 + rng() % 30;
    const ImageRGB8 img = random_image(rng, h, w);
    const double z = trial % 2 ? 1.25 : 2.0;
    const ImageRGB8 out = apply_transform(img, {TransformKind::ZoomIn, z});
    REQUIRE(out.height() == h);
    REQUIRE(out.width() == w);
    const auto ch = static_cast<std::size_t>(std::floor(h / z));
    const auto cw = static_cast<std::size_t>(std::floor(w / z));
    ImageRGB8 crop(ch, cw);
    for (std::size_t r = 0; r < ch; ++r)
      for (std::size_t c = 0; c < cw; ++c) crop.at(r, c) = img.at((h - ch) / 2 + r, (w - cw) / 2 + c);
    const ImageRGB8 ref = reference_resize(crop, h, w);
    int worst = 0;
    for (std::size_t i = 0; i < out.pixels().size(); ++i) {
      worst = std::max({worst, std::abs(out.pixels()[i].r - ref.pixels()[i].r),
                        std::abs(out.pixels()[i].g - ref.pixels()[i].g),
                        std::abs(out.pixels()[i].b - ref.pixels()[i].b)});
    }
    CHECK(worst <= 1);  // exact .5 cases may round either way depending on summation order
  }
  const ImageRGB8 flat(9, 9, Rgb{10, 20, 30});
  CHECK(apply_transform(flat, {TransformKind::ZoomIn, 1.25}) == flat);
  CHECK_THROWS_AS(apply_transform(flat, {TransformKind::ZoomIn, 1.0}), InvalidInput);
  CHECK_THROWS_AS(apply_transform(flat, {TransformKind::ZoomIn, 0.5}), InvalidInput);
  CHECK_THROWS_AS(apply_transform(ImageRGB8{}, {TransformKind::Rot90}), InvalidInput);
}

TEST_CASE("augmented count") {
  CHECK(augmented_count(200) == 1300);
  CHECK(augmented_count(204) == 1326);
  CHECK(augmented_count(0) == 0);
  for (std::size_t n = 0; n < 50; ++n) {
    CHECK(augmented_count(n) == n * 6 + static_cast<std::size_t>(std::ceil(n / 2.0)));
  }
}

TEST_CASE("augment a small dataset") {
  bwv::testing::TempDir dir("augment");
  std::mt19937_64 rng(1);
  DatasetManifest m;
  for (int i = 0; i < 5; ++i) {
    ManifestEntry e;
    e.id = "img" + std::to_string(i);
    e.path = dir / (e.id + ".png");
    e.label = i % 2 ? Label::Bwv : Label::NonBwv;
    e.split = i == 4 ? Split::Test : Split::Train;
    write_png(random_image(rng, 12, 10), e.path);
    m.entries.push_back(e);
  }
  const DatasetManifest out = augment_dataset(m, {dir / "aug", 1.25});
  REQUIRE(out.size() == 33);

  std::size_t zooms = 0;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const ManifestEntry& src = m.entries[i];
    CHECK(out.entries[cursor] == src);
    const ImageRGB8 img = read_image(src.path);
    const std::size_t copies = i < 3 ? 6 : 5;
    for (std::size_t k = 1; k <= copies; ++k) {
      const ManifestEntry& e = out.entries[cursor + k];
      REQUIRE(e.augmented.has_value());
      CHECK(e.label == src.label);
      CHECK(e.split == src.split);
      CHECK(e.augmented->source_id == src.id);
      CHECK(e.group_key() == src.id);
      CHECK(e.id == src.id + "__" + std::string(to_string(e.augmented->transform)));
      CHECK(e.path.filename() == e.id + ".png");
      CHECK(read_image(e.path) == apply_transform(img, {e.augmented->transform, 1.25}));
      zooms += e.augmented->transform == TransformKind::ZoomIn;
    }
    cursor += copies + 1;
  }
  CHECK(zooms == 3);
  CHECK(augment_dataset(DatasetManifest{}, {dir / "none", 1.25}).empty());
}

TEST_CASE("transform tokens round-trip") {
  for (auto k : {TransformKind::Identity, TransformKind::Rot90, TransformKind::Rot180,
                 TransformKind::Rot270, TransformKind::FlipH, TransformKind::FlipV,
                 TransformKind::ZoomIn}) {
    CHECK(parse_transform(to_string(k)) == k);
  }
  CHECK_FALSE(parse_transform("shear").has_value());
}
