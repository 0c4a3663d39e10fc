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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bwv/image.hpp"
#include "bwv/label.hpp"
#include "bwv/tensor.hpp"
#include "bwv/transform.hpp"

namespace bwv {

enum class Split { Unassigned, Train, Val, Test };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view token);

struct Provenance {
  std::string source_id;
  TransformKind transform = TransformKind::Identity;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ManifestEntry {
  std::string id;
  std::filesystem::path path;
  Label label = Label::NonBwv;
  std::optional<Provenance> augmented;  // empty for original images
  Split split = Split::Unassigned;

  // Id of the original image this entry derives from (its own id when it is
  // an original). Entries sharing a group key never straddle splits.
  const std::string& group_key() const { return augmented ? augmented->source_id : id; }

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  std::size_t count(Label label) const;
  std::size_t count(Split split) const;
  DatasetManifest filter(Split split) const;

  // Throws DataError listing duplicate ids and (if check_paths) missing files.
  void validate(bool check_paths = true) const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// JSON-lines, one entry per line. Relative paths are stored relative to the
// manifest file's directory and resolved against it on read. Missing "id",
// "origin" or "split" fields default to the path stem, original and
// unassigned, so annotator output reads as a manifest.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// `path` relative to `base_dir` when possible, with forward slashes.
std::string relative_path_string(const std::filesystem::path& path,
                                 const std::filesystem::path& base_dir);

struct IngestResult {
  DatasetManifest manifest;
  std::vector<std::string> warnings;  // unlabeled images, labels without images
};

// Pairs every image in `image_dir` with its label from a `stem,label` CSV.
// Unreadable images, duplicate stems and unknown label tokens are collected
// into a single DataError.
IngestResult ingest(const std::filesystem::path& image_dir,
                    const std::filesystem::path& labels_file);

struct SplitPlan {
  double train = 0.8;
  double val = 0.2;
  double test = 0.0;
  std::uint64_t seed = 0;
  bool stratified = true;
  bool keep_groups = true;  // augmented copies follow their source image

  void validate() const;
};

// Seeded assignment of every entry to train/val/test. Per class (when
// stratified) and overall, the number of units per split is within one of
// the exact fraction; a unit is a group of entries sharing a source image
// when keep_groups is set, otherwise a single entry.
DatasetManifest split(const DatasetManifest& manifest, const SplitPlan& plan);

inline constexpr std::size_t kNetworkInputSize = 256;

// Decodes, resizes (bilinear) to size x size, scales to [0, 1] and stacks
// channel-first: [N, 3, size, size].
Tensor load_batch(std::span<const ManifestEntry> entries, std::size_t size = kNetworkInputSize);
Tensor images_to_batch(std::span<const ImageRGB8> images, std::size_t size = kNetworkInputSize);

}  // namespace bwv
