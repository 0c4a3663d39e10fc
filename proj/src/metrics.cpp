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

#include "bwv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "bwv/error.hpp"

namespace bwv {

Ratio Ratio::of(std::uint64_t numerator, std::uint64_t denominator,
                std::string reason_if_undefined) {
  if (denominator == 0) return Ratio{std::nullopt, std::move(reason_if_undefined)};
  return Ratio{static_cast<double>(numerator) / static_cast<double>(denominator), {}};
}

ConfusionMatrix tally(std::span<const Label> predicted, std::span<const Label> reference) {
  if (predicted.size() != reference.size()) {
    throw InvalidInput("tally: " + std::to_string(predicted.size()) + " predictions vs " +
                       std::to_string(reference.size()) + " reference labels");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool pred_pos = predicted[i] == Label::Bwv;
    const bool ref_pos = reference[i] == Label::Bwv;
    if (pred_pos && ref_pos) ++cm.tp;
    else if (pred_pos) ++cm.fp;
    else if (ref_pos) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

MetricReport compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw InvalidInput("compute_metrics: empty confusion matrix");
  MetricReport r;
  r.ac = Ratio::of(cm.tp + cm.tn, cm.total(), "no samples");
  r.pr = Ratio::of(cm.tp, cm.tp + cm.fp, "no positive predictions (TP + FP = 0)");
  r.se = Ratio::of(cm.tp, cm.tp + cm.fn, "no positive references (TP + FN = 0)");
  r.f1 = Ratio::of(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn,
                   "no positives predicted or present (2TP + FP + FN = 0)");
  r.sp = Ratio::of(cm.tn, cm.fp + cm.tn, "no negative references (FP + TN = 0)");
  r.auc = Ratio{std::nullopt, "no scores supplied"};
  return r;
}

double auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) {
    throw InvalidInput("auc: scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  for (double s : scores) {
    if (!std::isfinite(s)) throw InvalidInput("auc: non-finite score");
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the Mann-Whitney U statistic, kept integral so ties stay exact.
  std::uint64_t twice_u = 0;
  std::uint64_t negatives_below = 0;
  std::uint64_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos_here = 0;
    std::uint64_t neg_here = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == Label::Bwv ? pos_here : neg_here)++;
      ++j;
    }
    twice_u += pos_here * (2 * negatives_below + neg_here);
    negatives_below += neg_here;
    positives += pos_here;
    i = j;
  }
  const std::uint64_t negatives = negatives_below;
  if (positives == 0 || negatives == 0) {
    throw InvalidInput("auc: both classes must be present");
  }
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(positives) *
                                         static_cast<double>(negatives));
}

Ratio balanced_accuracy(const ConfusionMatrix& cm) {
  const Ratio se = Ratio::of(cm.tp, cm.tp + cm.fn, "no positive references");
  const Ratio sp = Ratio::of(cm.tn, cm.fp + cm.tn, "no negative references");
  if (!se.defined()) return se;
  if (!sp.defined()) return sp;
  return Ratio{(*se.value + *sp.value) / 2.0, {}};
}

namespace {

std::string cell(const Ratio& ratio) {
  if (!ratio.defined()) return "—";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *ratio.value * 100.0);
  return buf;
}

}  // namespace

std::string format_row(const MetricReport& report) {
  return cell(report.ac) + " " + cell(report.pr) + " " + cell(report.se) + " " +
         cell(report.f1) + " " + cell(report.sp) + " " + cell(report.auc);
}

std::vector<std::string> footnotes(const MetricReport& report) {
  std::vector<std::string> notes;
  const std::pair<const char*, const Ratio*> cells[] = {
      {"AC", &report.ac}, {"PR", &report.pr}, {"SE", &report.se},
      {"F1", &report.f1}, {"SP", &report.sp}, {"AUC", &report.auc}};
  for (const auto& [name, ratio] : cells) {
    if (!ratio->defined()) notes.push_back(std::string(name) + " undefined: " +
                                           ratio->undefined_reason);
  }
  return notes;
}

MetricReport report(const ConfusionMatrix& cm, std::optional<std::span<const double>> scores,
                    std::optional<std::span<const Label>> labels) {
  MetricReport r = compute_metrics(cm);
  if (scores.has_value() != labels.has_value()) {
    throw InvalidInput("report: scores and labels must be supplied together");
  }
  if (scores) r.auc = Ratio{auc(*scores, *labels), {}};
  return r;
}

}  // namespace bwv
