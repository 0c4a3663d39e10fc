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

// Hand transcription of the reference 31-row layer table, used as a
// structural fixture. Columns: kind, kernel, filters/neurons, dilation,
// 'same' padding, stride; zero where the table shows a dash.
#pragma once

#include <vector>

#include "bwv/network.hpp"

namespace bwv::testing {

struct ArchitectureRow {
  LayerKind kind;
  std::size_t kernel, filters, dilation;
  bool same;
  std::size_t stride;
};

inline const std::vector<ArchitectureRow>& architecture_fixture() {
  using K = LayerKind;
  static const std::vector<ArchitectureRow> rows{
      {K::Input, 0, 0, 0, false, 0},
      {K::Convolution, 5, 8, 2, true, 2},
      {K::Normalization, 0, 0, 0, false, 0},
      {K::Custom, 0, 8, 0, false, 0},
      {K::MaxPooling, 5, 0, 0, true, 2},
      {K::Convolution, 3, 16, 3, true, 3},
      {K::Normalization, 0, 0, 0, false, 0},
      {K::Custom, 0, 16, 0, false, 0},
      {K::MaxPooling, 3, 0, 0, true, 3},
      {K::Convolution, 5, 32, 2, true, 2},
      {K::Normalization, 0, 0, 0, false, 0},
      {K::Custom, 0, 32, 0, false, 0},
      {K::MaxPooling, 5, 0, 0, true, 2},
      {K::Convolution, 3, 64, 1, true, 1},
      {K::Normalization, 0, 0, 0, false, 0},
      {K::Custom, 0, 64, 0, false, 0},
      {K::MaxPooling, 3, 0, 0, true, 1},
      {K::Convolution, 5, 128, 2, true, 2},
      {K::Normalization, 0, 0, 0, false, 0},
      {K::Custom, 0, 128, 0, false, 0},
      {K::MaxPooling, 5, 0, 0, true, 2},
      {K::Convolution, 3, 256, 1, true, 1},
      {K::Normalization, 0, 0, 0, false, 0},
      {K::Custom, 0, 256, 0, false, 0},
      {K::MaxPooling, 3, 0, 0, true, 1},
      {K::Convolution, 5, 512, 3, true, 3},
      {K::Normalization, 0, 0, 0, false, 0},
      {K::Custom, 0, 512, 0, false, 0},
      {K::FullyConnected, 0, 2, 0, false, 0},  // two output classes
      {K::Softmax, 0, 0, 0, false, 0},
      {K::Classification, 0, 0, 0, false, 0},
  };
  return rows;
}

inline bool row_matches(const LayerSpec& s, const ArchitectureRow& r) {
  return s.kind == r.kind && s.kernel == nn::Extent2{r.kernel, r.kernel} && s.filters == r.filters &&
         s.dilation == nn::Extent2{r.dilation, r.dilation} && s.same_padding == r.same &&
         s.stride == nn::Extent2{r.stride, r.stride};
}

// Spatial extent after each convolution and pooling row, by ceil(in / stride).
inline std::vector<std::size_t> expected_spatial_trace() {
  return {256, 128, 64, 22, 8, 4, 2, 2, 2, 1, 1, 1, 1, 1};
}

}  // namespace bwv::testing
