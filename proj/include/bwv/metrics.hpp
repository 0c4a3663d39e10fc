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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bwv/label.hpp"

namespace bwv {

// Counts for a binary problem where BWV is the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t positives() const { return tp + fn; }
  std::uint64_t negatives() const { return fp + tn; }
  std::uint64_t total() const { return positives() + negatives(); }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// A ratio in [0, 1], or the reason it has no value.
struct Ratio {
  std::optional<double> value;
  std::string undefined_reason;

  static Ratio of(std::uint64_t numerator, std::uint64_t denominator,
                  std::string reason_if_undefined);
  bool defined() const { return value.has_value(); }
};

struct MetricReport {
  Ratio ac;
  Ratio pr;
  Ratio se;
  Ratio f1;
  Ratio sp;
  Ratio auc;  // undefined unless scores were supplied
};

// Tallies predictions against reference labels.
ConfusionMatrix tally(std::span<const Label> predicted, std::span<const Label> reference);

// Accuracy, precision, sensitivity, F1 and specificity. Throws InvalidInput
// when the matrix is empty.
MetricReport compute_metrics(const ConfusionMatrix& cm);

// Rank-based (Mann-Whitney) area under the ROC curve; ties count one half.
// `scores` are higher-means-positive. Throws InvalidInput unless both classes
// are present.
double auc(std::span<const double> scores, std::span<const Label> labels);

// (SE + SP) / 2 of a single operating point. Diagnostic only; this is not
// the area under a curve.
Ratio balanced_accuracy(const ConfusionMatrix& cm);

// One table row: "AC PR SE F1 SP AUC" as percentages with two decimals,
// "—" for undefined cells.
std::string format_row(const MetricReport& report);

// Footnotes for every undefined cell in `report`, e.g. "PR undefined: ...".
std::vector<std::string> footnotes(const MetricReport& report);

// compute_metrics plus AUC when scores are provided.
MetricReport report(const ConfusionMatrix& cm,
                    std::optional<std::span<const double>> scores = std::nullopt,
                    std::optional<std::span<const Label>> labels = std::nullopt);

}  // namespace bwv
