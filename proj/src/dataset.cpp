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

#include "bwv/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bwv/error.hpp"
#include "bwv/parallel.hpp"

namespace bwv {

using nlohmann::ordered_json;

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::Identity: return "identity";
    case TransformKind::Rot90: return "rot90";
    case TransformKind::Rot180: return "rot180";
    case TransformKind::Rot270: return "rot270";
    case TransformKind::FlipH: return "fliph";
    case TransformKind::FlipV: return "flipv";
    case TransformKind::ZoomIn: return "zoomin";
  }
  return "?";
}

std::optional<TransformKind> parse_transform(std::string_view token) {
  for (auto kind : {TransformKind::Identity, TransformKind::Rot90, TransformKind::Rot180,
                    TransformKind::Rot270, TransformKind::FlipH, TransformKind::FlipV,
                    TransformKind::ZoomIn}) {
    if (to_string(kind) == token) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Unassigned: return "unassigned";
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view token) {
  for (auto s : {Split::Unassigned, Split::Train, Split::Val, Split::Test}) {
    if (to_string(s) == token) return s;
  }
  return std::nullopt;
}

std::size_t DatasetManifest::count(Label label) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [&](const ManifestEntry& e) { return e.label == label; }));
}

std::size_t DatasetManifest::count(Split s) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [&](const ManifestEntry& e) { return e.split == s; }));
}

DatasetManifest DatasetManifest::filter(Split s) const {
  DatasetManifest out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out.entries),
               [&](const ManifestEntry& e) { return e.split == s; });
  return out;
}

void DatasetManifest::validate(bool check_paths) const {
  std::vector<std::string> problems;
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (e.id.empty()) problems.push_back("entry with empty id (" + e.path.string() + ")");
    if (!seen.insert(e.id).second) problems.push_back("duplicate id '" + e.id + "'");
    if (check_paths && !std::filesystem::exists(e.path)) {
      problems.push_back("missing file for '" + e.id + "': " + e.path.string());
    }
  }
  if (!problems.empty()) throw DataError("invalid manifest", problems);
}

std::string relative_path_string(const std::filesystem::path& path,
                                 const std::filesystem::path& base_dir) {
  namespace fs = std::filesystem;
  const fs::path abs = fs::absolute(path).lexically_normal();
  const fs::path base = fs::absolute(base_dir.empty() ? fs::path(".") : base_dir).lexically_normal();
  const fs::path rel = abs.lexically_relative(base);
  return rel.empty() ? abs.generic_string() : rel.generic_string();
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  const std::filesystem::path base = path.parent_path();
  DatasetManifest manifest;
  std::vector<std::string> problems;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    try {
      const auto j = ordered_json::parse(line);
      ManifestEntry e;
      std::filesystem::path p = j.at("path").get<std::string>();
      e.path = p.is_relative() ? (base / p).lexically_normal() : p;
      e.id = j.contains("id") ? j.at("id").get<std::string>() : p.stem().string();
      const auto label = parse_label(j.at("label").get<std::string>());
      if (!label) {
        problems.push_back(where + ": unknown label token '" + j.at("label").get<std::string>() + "'");
        continue;
      }
      e.label = *label;
      const std::string origin = j.value("origin", "original");
      if (origin == "augmented") {
        const auto kind = parse_transform(j.at("transform").get<std::string>());
        if (!kind) {
          problems.push_back(where + ": unknown transform");
          continue;
        }
        e.augmented = Provenance{j.at("source_id").get<std::string>(), *kind};
      } else if (origin != "original") {
        problems.push_back(where + ": unknown origin '" + origin + "'");
        continue;
      }
      const auto s = parse_split(j.value("split", "unassigned"));
      if (!s) {
        problems.push_back(where + ": unknown split");
        continue;
      }
      e.split = *s;
      manifest.entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      problems.push_back(where + ": " + ex.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "malformed manifest " + path.string();
    for (const auto& p : problems) msg += "\n  - " + p;
    throw FormatError(msg);
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  const std::filesystem::path base = path.parent_path();
  std::ostringstream out;
  for (const auto& e : manifest.entries) {
    ordered_json j;
    j["id"] = e.id;
    j["path"] = relative_path_string(e.path, base);
    j["label"] = std::string(to_string(e.label));
    if (e.augmented) {
      j["origin"] = "augmented";
      j["source_id"] = e.augmented->source_id;
      j["transform"] = std::string(to_string(e.augmented->transform));
    } else {
      j["origin"] = "original";
    }
    j["split"] = std::string(to_string(e.split));
    out << j.dump() << '\n';
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw DataError("cannot write manifest: " + path.string());
  file << out.str();
  if (!file) throw DataError("failed writing manifest: " + path.string());
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

IngestResult ingest(const std::filesystem::path& image_dir,
                    const std::filesystem::path& labels_file) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(image_dir)) throw DataError("not a directory: " + image_dir.string());
  std::ifstream in(labels_file);
  if (!in) throw DataError("cannot open labels file: " + labels_file.string());

  std::vector<std::string> errors;
  std::map<std::string, Label> labels;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const std::string where = labels_file.filename().string() + ":" + std::to_string(lineno);
    if (comma == std::string::npos) {
      errors.push_back(where + ": expected 'stem,label'");
      continue;
    }
    const std::string stem = trim(line.substr(0, comma));
    const std::string token = trim(line.substr(comma + 1));
    if (lineno == 1 && stem == "stem" && token == "label") continue;
    const auto label = parse_label(token);
    if (!label) {
      errors.push_back(where + ": unknown label token '" + token + "'");
      continue;
    }
    if (!labels.emplace(stem, *label).second) {
      errors.push_back(where + ": duplicate stem '" + stem + "' in labels file");
    }
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(image_dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  IngestResult result;
  std::set<std::string> stems;
  for (const auto& file : files) {
    const std::string stem = file.stem().string();
    if (!stems.insert(stem).second) {
      errors.push_back("duplicate stem '" + stem + "' in " + image_dir.string());
      continue;
    }
    const auto it = labels.find(stem);
    if (it == labels.end()) {
      result.warnings.push_back("no label for image " + file.filename().string());
      continue;
    }
    try {
      (void)read_image(file);
    } catch (const DataError& e) {
      errors.push_back(e.what());
      continue;
    }
    result.manifest.entries.push_back({stem, file, it->second, std::nullopt, Split::Unassigned});
  }
  for (const auto& [stem, label] : labels) {
    if (!stems.count(stem)) result.warnings.push_back("label for '" + stem + "' has no image");
  }
  if (!errors.empty()) throw DataError("ingest failed", errors);
  return result;
}

// ---------------------------------------------------------------------------

void SplitPlan::validate() const {
  for (double f : {train, val, test}) {
    if (!(f >= 0.0 && f <= 1.0)) throw InvalidInput("split fractions must lie in [0, 1]");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) {
    throw InvalidInput("split fractions must sum to 1");
  }
}

namespace {

constexpr std::size_t kSplits = 3;
constexpr Split kSplitOrder[kSplits] = {Split::Train, Split::Val, Split::Test};

// Largest-remainder rounding of n * fractions; ties go to the earlier split.
std::array<std::size_t, kSplits> apportion(std::size_t n, const std::array<double, kSplits>& f) {
  std::array<std::size_t, kSplits> out{};
  std::array<double, kSplits> frac{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < kSplits; ++s) {
    const double ideal = static_cast<double>(n) * f[s];
    out[s] = static_cast<std::size_t>(std::floor(ideal + 1e-9));
    frac[s] = ideal - static_cast<double>(out[s]);
    assigned += out[s];
  }
  std::array<std::size_t, kSplits> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % kSplits) {
    if (f[order[k]] > 0.0) {
      ++out[order[k]];
      ++assigned;
    }
  }
  return out;
}

}  // namespace

DatasetManifest split(const DatasetManifest& manifest, const SplitPlan& plan) {
  plan.validate();
  const std::array<double, kSplits> fractions{plan.train, plan.val, plan.test};

  // Units in order of first appearance.
  std::vector<std::vector<std::size_t>> units;
  std::map<std::string, std::size_t> unit_of_group;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    if (plan.keep_groups) {
      const auto [it, inserted] =
          unit_of_group.emplace(manifest.entries[i].group_key(), units.size());
      if (inserted) units.emplace_back();
      units[it->second].push_back(i);
    } else {
      units.push_back({i});
    }
  }

  // Strata: one per class when stratified, otherwise a single stratum.
  std::vector<std::vector<std::size_t>> strata(plan.stratified ? kClassCount : 1);
  for (std::size_t u = 0; u < units.size(); ++u) {
    const Label label = manifest.entries[units[u].front()].label;
    for (std::size_t idx : units[u]) {
      if (manifest.entries[idx].label != label) {
        throw InvalidInput("split: entries of group '" + manifest.entries[idx].group_key() +
                           "' carry different labels");
      }
    }
    strata[plan.stratified ? static_cast<std::size_t>(class_index(label)) : 0].push_back(u);
  }

  for (std::size_t s = 0; s < kSplits; ++s) {
    if (fractions[s] <= 0.0) continue;
    for (std::size_t c = 0; c < strata.size(); ++c) {
      if (strata[c].empty()) continue;
      if (static_cast<double>(strata[c].size()) * fractions[s] < 1.0 - 1e-9) {
        throw InvalidInput("split: fraction infeasible: " + std::to_string(fractions[s]) +
                           " of " + std::to_string(strata[c].size()) +
                           (plan.stratified ? " units in one class" : " units") +
                           " is less than one unit for split '" +
                           std::string(to_string(kSplitOrder[s])) + "'");
      }
    }
  }

  // Per-stratum counts that add up to the overall apportionment.
  const auto totals = apportion(units.size(), fractions);
  std::vector<std::array<std::size_t, kSplits>> counts(strata.size());
  std::array<std::size_t, kSplits> remaining_split = totals;
  std::vector<std::size_t> remaining_stratum(strata.size());
  struct Candidate {
    double frac;
    std::size_t stratum, split;
  };
  std::vector<Candidate> candidates;
  for (std::size_t c = 0; c < strata.size(); ++c) {
    std::size_t used = 0;
    for (std::size_t s = 0; s < kSplits; ++s) {
      const double ideal = static_cast<double>(strata[c].size()) * fractions[s];
      counts[c][s] = static_cast<std::size_t>(std::floor(ideal + 1e-9));
      used += counts[c][s];
      remaining_split[s] -= counts[c][s];
      if (fractions[s] > 0.0) candidates.push_back({ideal - static_cast<double>(counts[c][s]), c, s});
    }
    remaining_stratum[c] = strata[c].size() - used;
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.frac > b.frac; });
  for (const auto& cand : candidates) {
    if (remaining_stratum[cand.stratum] > 0 && remaining_split[cand.split] > 0) {
      ++counts[cand.stratum][cand.split];
      --remaining_stratum[cand.stratum];
      --remaining_split[cand.split];
    }
  }
  for (std::size_t c = 0; c < strata.size(); ++c) {
    for (std::size_t s = 0; s < kSplits && remaining_stratum[c] > 0; ++s) {
      while (remaining_stratum[c] > 0 && remaining_split[s] > 0) {
        ++counts[c][s];
        --remaining_stratum[c];
        --remaining_split[s];
      }
    }
  }

  DatasetManifest out = manifest;
  std::mt19937_64 rng(plan.seed);
  for (std::size_t c = 0; c < strata.size(); ++c) {
    std::vector<std::size_t> order = strata[c];
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t pos = 0;
    for (std::size_t s = 0; s < kSplits; ++s) {
      for (std::size_t k = 0; k < counts[c][s]; ++k, ++pos) {
        for (std::size_t idx : units[order[pos]]) out.entries[idx].split = kSplitOrder[s];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void write_planar(const ImageRGB8& image, std::size_t size, float* dst) {
  const PlanarImage planar = resize_bilinear_planar(image, size, size, 255.0f);
  std::copy(planar.data.begin(), planar.data.end(), dst);
}

}  // namespace

Tensor images_to_batch(std::span<const ImageRGB8> images, std::size_t size) {
  if (images.empty()) throw InvalidInput("images_to_batch: no images");
  Tensor batch({images.size(), 3, size, size});
  const std::size_t stride = 3 * size * size;
  parallel_for(images.size(), [&](std::size_t i) {
    write_planar(images[i], size, batch.raw() + i * stride);
  });
  return batch;
}

Tensor load_batch(std::span<const ManifestEntry> entries, std::size_t size) {
  if (entries.empty()) throw InvalidInput("load_batch: no entries");
  Tensor batch({entries.size(), 3, size, size});
  const std::size_t stride = 3 * size * size;
  parallel_for(entries.size(), [&](std::size_t i) {
    write_planar(read_image(entries[i].path), size, batch.raw() + i * stride);
  });
  return batch;
}

}  // namespace bwv
