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
#include <filesystem>
#include <string>
#include <vector>

#include "bwv/image.hpp"
#include "bwv/label.hpp"

namespace bwv {

// Labeled stand-in images: skin-tone backgrounds carrying either blue-gray
// blobs inside the annotator's color range (BWV) or brown blobs outside it.
struct SynthOptions {
  std::size_t count = 12;
  std::size_t size = 64;
  double bwv_fraction = 0.5;
  std::uint64_t seed = 0;
};

struct SynthSample {
  std::string stem;
  Label label;
  ImageRGB8 image;
};

std::vector<SynthSample> synth_images(const SynthOptions& opts);

// Writes <stem>.png files and a labels.csv ("stem,label") into dir.
void write_synth(const std::vector<SynthSample>& samples, const std::filesystem::path& dir);

}  // namespace bwv
