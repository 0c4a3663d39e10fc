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

#include "bwv/augment.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bwv/error.hpp"
#include "bwv/parallel.hpp"

namespace bwv {

ImageRGB8 apply_transform(const ImageRGB8& image, const Transform& t) {
  if (image.empty()) throw InvalidInput("apply_transform: empty image");
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  switch (t.kind) {
    case TransformKind::Identity:
      return image;
    case TransformKind::Rot90: {
      ImageRGB8 out(w, h);
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) out.at(c, h - 1 - r) = image.at(r, c);
      return out;
    }
    case TransformKind::Rot180: {
      ImageRGB8 out(h, w);
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) out.at(h - 1 - r, w - 1 - c) = image.at(r, c);
      return out;
    }
    case TransformKind::Rot270: {
      ImageRGB8 out(w, h);
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) out.at(w - 1 - c, r) = image.at(r, c);
      return out;
    }
    case TransformKind::FlipH: {
      ImageRGB8 out(h, w);
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) out.at(r, w - 1 - c) = image.at(r, c);
      return out;
    }
    case TransformKind::FlipV: {
      ImageRGB8 out(h, w);
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) out.at(h - 1 - r, c) = image.at(r, c);
      return out;
    }
    case TransformKind::ZoomIn: {
      if (!(t.zoom_factor > 1.0) || !std::isfinite(t.zoom_factor)) {
        throw InvalidInput("apply_transform: zoom factor must be > 1");
      }
      const auto ch = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(h / t.zoom_factor)));
      const auto cw = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(w / t.zoom_factor)));
      const std::size_t top = (h - ch) / 2;
      const std::size_t left = (w - cw) / 2;
      ImageRGB8 crop(ch, cw);
      for (std::size_t r = 0; r < ch; ++r)
        for (std::size_t c = 0; c < cw; ++c) crop.at(r, c) = image.at(top + r, left + c);
      return resize_bilinear(crop, h, w);
    }
  }
  return image;
}

DatasetManifest augment_dataset(const DatasetManifest& manifest, const AugmentOptions& options) {
  if (!(options.zoom_factor > 1.0)) throw InvalidInput("augment: zoom factor must be > 1");
  DatasetManifest out;
  if (manifest.empty()) return out;

  constexpr TransformKind kAlways[] = {TransformKind::Rot90, TransformKind::Rot180,
                                       TransformKind::Rot270, TransformKind::FlipH,
                                       TransformKind::FlipV};
  const std::size_t n = manifest.size();
  const std::size_t zoomed = (n + 1) / 2;

  std::vector<std::vector<ManifestEntry>> per_source(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ManifestEntry& src = manifest.entries[i];
    per_source[i].push_back(src);
    auto add = [&](TransformKind kind) {
      ManifestEntry e;
      const std::string suffix = "__" + std::string(to_string(kind));
      e.id = src.id + suffix;
      e.path = options.out_dir / (src.id + suffix + ".png");
      e.label = src.label;
      e.augmented = Provenance{src.group_key(), kind};
      e.split = src.split;
      per_source[i].push_back(std::move(e));
    };
    for (auto kind : kAlways) add(kind);
    if (i < zoomed) add(TransformKind::ZoomIn);
  }

  if (!options.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) throw DataError("cannot create output directory: " + options.out_dir.string());
  }
  parallel_for(n, [&](std::size_t i) {
    const ImageRGB8 image = read_image(manifest.entries[i].path);
    for (std::size_t k = 1; k < per_source[i].size(); ++k) {
      const ManifestEntry& e = per_source[i][k];
      write_png(apply_transform(image, {e.augmented->transform, options.zoom_factor}), e.path);
    }
  });

  out.entries.reserve(augmented_count(n));
  for (auto& group : per_source) {
    for (auto& e : group) out.entries.push_back(std::move(e));
  }
  return out;
}

}  // namespace bwv
