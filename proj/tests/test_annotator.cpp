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

#include <random>

#include "bwv/annotator.hpp"
#include "bwv/error.hpp"
#include "support/oracles.hpp"

using namespace bwv;
using bwv::testing::matches_oracle;
using bwv::testing::oracle_annotate;

namespace {

ImageRGB8 filled(std::size_t h, std::size_t w, Rgb c) { return ImageRGB8(h, w, c); }

constexpr Rgb kWhite{255, 255, 255};
constexpr Rgb kVeil{73, 73, 73};

}  // namespace

TEST_CASE("default range") {
  const ColorRange r;
  CHECK(r == ColorRange{45, 166, 73, 98, 73, 98});
  CHECK_NOTHROW(r.validate());
  CHECK_THROWS_AS((ColorRange{100, 50, 73, 98, 73, 98}.validate()), InvalidInput);
}

TEST_CASE("palette matches the reference 80-entry table") {
  // Red channel row by row; green and blue are 73 for the first 50 entries
  // and 98 for the last 30.
  const int red[80] = {73,  98,  83,  92,  79,  97,  85,  108, 71,  82,  80,  86,  75,  109,
                       89,  119, 96,  94,  103, 125, 66,  90,  84,  117, 93,  81,  110, 138,
                       121, 50,  99,  139, 95,  120, 62,  88,  137, 114, 126, 106, 118, 78,
                       102, 61,  87,  115, 56,  77,  74,  136, 98,  112, 116, 75,  130, 56,
                       129, 124, 104, 113, 81,  92,  88,  166, 90,  109, 131, 79,  101, 114,
                       61,  108, 46,  161, 110, 111, 132, 91,  121, 135};
  const auto palette = reference_palette();
  REQUIRE(palette.size() == 80);
  for (std::size_t i = 0; i < 80; ++i) {
    const int gb = i < 50 ? 73 : 98;
    CHECK(palette[i] == Rgb{static_cast<std::uint8_t>(red[i]), static_cast<std::uint8_t>(gb),
                            static_cast<std::uint8_t>(gb)});
    CHECK(pixel_in_range(palette[i], ColorRange{}));
  }
}

TEST_CASE("pixel membership") {
  const ColorRange r;
  CHECK(pixel_in_range({73, 73, 73}, r));
  CHECK(pixel_in_range({45, 73, 73}, r));
  CHECK(pixel_in_range({166, 98, 98}, r));
  CHECK_FALSE(pixel_in_range({167, 98, 98}, r));
  CHECK_FALSE(pixel_in_range({44, 73, 73}, r));
  CHECK_FALSE(pixel_in_range({100, 72, 80}, r));
  CHECK_FALSE(pixel_in_range({100, 80, 99}, r));
  CHECK_FALSE(pixel_in_range(kWhite, r));
}

TEST_CASE("patch scan examples") {
  const ColorRange r;
  SUBCASE("all in range") {
    const PatchGrid g = scan_patches(filled(32, 32, kVeil), r);
    CHECK(g.rows == 2);
    CHECK(g.cols == 2);
    CHECK(g.flagged_count() == 4);
    for (std::size_t c : g.hit_counts) CHECK(c == 256);
  }
  SUBCASE("all white") {
    const PatchGrid g = scan_patches(filled(32, 32, kWhite), r);
    CHECK(g.flagged_count() == 0);
    for (std::size_t c : g.hit_counts) CHECK(c == 0);
  }
  SUBCASE("single pixel in a partial corner patch") {
    ImageRGB8 img = filled(20, 20, kWhite);
    img.at(18, 18) = kVeil;
    const PatchGrid g = scan_patches(img, r);
    CHECK(g.rows == 2);
    CHECK(g.cols == 2);
    CHECK(g.flagged_patches() == std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}});
    CHECK(g.hit_counts[3] == 1);
  }
  SUBCASE("min_pixels threshold") {
    ImageRGB8 img = filled(16, 32, kWhite);
    img.at(0, 0) = kVeil;
    img.at(1, 1) = kVeil;
    img.at(0, 20) = kVeil;
    const PatchGrid g = scan_patches(img, r, 16, 2);
    CHECK(g.flagged(0, 0));
    CHECK_FALSE(g.flagged(0, 1));
  }
  CHECK_THROWS_AS(scan_patches(ImageRGB8{}, r), InvalidInput);
  CHECK_THROWS_AS(scan_patches(filled(4, 4, kWhite), r, 0), InvalidInput);
}

TEST_CASE("image classification examples") {
  const ColorRange r;
  ImageRGB8 img = filled(40, 40, kWhite);
  img.at(5, 5) = {86, 73, 73};
  img.at(30, 33) = {123, 86, 88};
  const AnnotationResult a = classify_image(img, r);
  CHECK(a.label == Label::Bwv);
  REQUIRE(a.rgb_extrema.has_value());
  CHECK(a.rgb_extrema->min == std::array<int, 3>{86, 73, 73});
  CHECK(a.rgb_extrema->max == std::array<int, 3>{123, 86, 88});

  ScanOptions strict;
  strict.min_patches = 3;
  CHECK(classify_image(img, r, strict).label == Label::NonBwv);

  const AnnotationResult black = classify_image(filled(17, 17, {0, 0, 0}), r);
  CHECK(black.label == Label::NonBwv);
  CHECK_FALSE(black.rgb_extrema.has_value());
}

TEST_CASE("classification agrees with the per-pixel oracle") {
  std::mt19937_64 rng(2024);
  const ColorRange r;
  for (int trial = 0; trial < 200; ++trial) {
    const ImageRGB8 img = bwv::testing::random_annotation_image(rng);
    ScanOptions opts;
    opts.patch_size = 1 + rng() % 20;
    opts.min_pixels = 1 + rng() % 3;
    opts.min_patches = 1 + rng() % 2;
    const AnnotationResult got = classify_image(img, r, opts);
    CHECK(matches_oracle(got, oracle_annotate(img, r, opts.patch_size, opts.min_pixels,
                                              opts.min_patches)));
    // hit counts partition the in-range pixels
    std::size_t total = 0, direct = 0;
    for (std::size_t c : got.grid.hit_counts) total += c;
    for (const Rgb& p : img.pixels()) direct += pixel_in_range(p, r);
    CHECK(total == direct);
    if (got.rgb_extrema) {
      CHECK(got.rgb_extrema->min[0] >= r.r_min);
      CHECK(got.rgb_extrema->max[0] <= r.r_max);
      CHECK(got.rgb_extrema->min[2] >= r.b_min);
      CHECK(got.rgb_extrema->max[2] <= r.b_max);
    }
  }
}

TEST_CASE("overlay") {
  const ColorRange r;
  SUBCASE("nothing flagged leaves the image unchanged") {
    const ImageRGB8 img = filled(30, 30, kWhite);
    CHECK(render_overlay(img, scan_patches(img, r)) == img);
  }
  SUBCASE("single full patch gets a 60-pixel border") {
    const ImageRGB8 img = filled(16, 16, kVeil);
    const ImageRGB8 out = render_overlay(img, scan_patches(img, r));
    std::size_t red = 0;
    for (const Rgb& p : out.pixels()) red += p == Rgb{255, 0, 0};
    CHECK(red == 60);
  }
  SUBCASE("interior patch changes exactly its perimeter") {
    ImageRGB8 img = filled(48, 48, kWhite);
    img.at(20, 20) = kVeil;
    const PatchGrid g = scan_patches(img, r);
    const ImageRGB8 out = render_overlay(img, g);
    for (std::size_t y = 0; y < 48; ++y) {
      for (std::size_t x = 0; x < 48; ++x) {
        const bool inside = y >= 16 && y < 32 && x >= 16 && x < 32;
        const bool perimeter = inside && (y == 16 || y == 31 || x == 16 || x == 31);
        if (perimeter) {
          CHECK(out.at(y, x) == Rgb{255, 0, 0});
        } else {
          CHECK(out.at(y, x) == img.at(y, x));
        }
      }
    }
    CHECK(render_overlay(out, g) == out);  // idempotent
  }
  CHECK_THROWS_AS(render_overlay(filled(40, 40, kWhite), scan_patches(filled(20, 20, kWhite), r)),
                  InvalidInput);
}

TEST_CASE("agreement scoring") {
  const std::vector<Label> ref{Label::Bwv, Label::NonBwv, Label::Bwv, Label::NonBwv};
  const ConfusionMatrix same = score_agreement(ref, ref);
  CHECK(same.fp == 0);
  CHECK(same.fn == 0);
  std::vector<Label> inverted;
  for (Label l : ref) inverted.push_back(l == Label::Bwv ? Label::NonBwv : Label::Bwv);
  const ConfusionMatrix inv = score_agreement(inverted, ref);
  CHECK(inv.tp == 0);
  CHECK(inv.tn == 0);
  CHECK(inv.total() == 4);
  CHECK_THROWS_AS(score_agreement(inverted, std::vector<Label>{Label::Bwv}), InvalidInput);
}
