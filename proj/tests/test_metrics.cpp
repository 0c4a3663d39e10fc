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
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "bwv/error.hpp"
#include "bwv/metrics.hpp"
#include "support/oracles.hpp"

using namespace bwv;
using bwv::testing::pairwise_auc;

namespace {

std::string pct(const Ratio& r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *r.value * 100);
  return buf;
}

// Trapezoidal area under the ROC curve swept over every distinct threshold.
double trapezoid_auc(const std::vector<double>& s, const std::vector<Label>& l) {
  std::vector<double> thresholds = s;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const double p = static_cast<double>(std::count(l.begin(), l.end(), Label::Bwv));
  const double n = static_cast<double>(l.size()) - p;
  double area = 0, prev_tpr = 0, prev_fpr = 0;
  for (double t : thresholds) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) (l[i] == Label::Bwv ? tp : fp) += 1;
    }
    const double tpr = tp / p, fpr = fp / n;
    area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2;
    prev_tpr = tpr;
    prev_fpr = fpr;
  }
  return area;
}

std::vector<Label> random_labels(std::mt19937_64& rng, std::size_t n) {
  std::vector<Label> l(n);
  std::bernoulli_distribution coin(0.5);
  for (auto& x : l) x = coin(rng) ? Label::Bwv : Label::NonBwv;
  l[0] = Label::Bwv;
  l[1] = Label::NonBwv;
  return l;
}

}  // namespace

TEST_CASE("annotator agreement counts from the reference comparison") {
  const MetricReport m = compute_metrics({66, 1, 0, 137});
  CHECK(pct(m.ac) == "99.51");
  CHECK(pct(m.pr) == "98.51");
  CHECK(pct(m.se) == "100.00");
  CHECK(pct(m.sp) == "99.28");
  CHECK(pct(m.f1) == "99.25");
  CHECK(format_row(m) == "99.51 98.51 100.00 99.25 99.28 —");
}

TEST_CASE("reference 20-image row is reproduced by its unique matrix") {
  const std::vector<std::string> row{"95.00", "100.00", "80.00", "88.89", "100.00"};
  std::vector<ConfusionMatrix> matches;
  for (std::uint64_t tp = 0; tp <= 20; ++tp)
    for (std::uint64_t fp = 0; tp + fp <= 20; ++fp)
      for (std::uint64_t fn = 0; tp + fp + fn <= 20; ++fn) {
        const ConfusionMatrix cm{tp, fp, fn, 20 - tp - fp - fn};
        const MetricReport m = compute_metrics(cm);
        if (!m.pr.defined() || !m.se.defined() || !m.f1.defined() || !m.sp.defined()) continue;
        if (std::vector<std::string>{pct(m.ac), pct(m.pr), pct(m.se), pct(m.f1), pct(m.sp)} == row) {
          matches.push_back(cm);
        }
      }
  REQUIRE(matches.size() == 1);
  CHECK(matches[0] == ConfusionMatrix{4, 0, 1, 15});
}

TEST_CASE("perfect classifier") {
  const MetricReport m = compute_metrics({10, 0, 0, 7});
  for (const Ratio* r : {&m.ac, &m.pr, &m.se, &m.f1, &m.sp}) CHECK(*r->value == 1.0);
  std::vector<double> scores{0.9, 0.8, 0.1};
  std::vector<Label> labels{Label::Bwv, Label::Bwv, Label::NonBwv};
  const MetricReport withauc =
      report({2, 0, 0, 1}, std::span<const double>(scores), std::span<const Label>(labels));
  CHECK(format_row(withauc) == "100.00 100.00 100.00 100.00 100.00 100.00");
}

TEST_CASE("undefined ratios are flagged, never zero") {
  const MetricReport m = compute_metrics({0, 0, 3, 5});
  CHECK_FALSE(m.pr.defined());
  CHECK(m.se.defined());
  CHECK(*m.se.value == 0.0);
  CHECK(format_row(m).find("—") != std::string::npos);
  const auto notes = footnotes(m);
  CHECK(std::any_of(notes.begin(), notes.end(),
                    [](const std::string& n) { return n.rfind("PR undefined", 0) == 0; }));

  const MetricReport negatives_only = compute_metrics({0, 0, 0, 5});
  CHECK_FALSE(negatives_only.pr.defined());
  CHECK_FALSE(negatives_only.se.defined());
  CHECK_FALSE(negatives_only.f1.defined());
  CHECK(*negatives_only.sp.value == 1.0);
  CHECK(*compute_metrics({0, 2, 0, 3}).f1.value == 0.0);
  CHECK_THROWS_AS(compute_metrics({0, 0, 0, 0}), InvalidInput);
}

TEST_CASE("metrics agree with per-sample counting") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    const auto ref = random_labels(rng, std::max<std::size_t>(n, 2));
    const auto pred = random_labels(rng, ref.size());
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const bool p = pred[i] == Label::Bwv, r = ref[i] == Label::Bwv;
      tp += p && r;
      fp += p && !r;
      fn += !p && r;
      tn += !p && !r;
    }
    const MetricReport m = compute_metrics(tally(pred, ref));
    CHECK(*m.ac.value == doctest::Approx((tp + tn) / (tp + fp + fn + tn)).epsilon(1e-15));
    if (tp + fp > 0) CHECK(*m.pr.value == doctest::Approx(tp / (tp + fp)).epsilon(1e-15));
    CHECK(*m.se.value == doctest::Approx(tp / (tp + fn)).epsilon(1e-15));
    CHECK(*m.sp.value == doctest::Approx(tn / (tn + fp)).epsilon(1e-15));
    if (m.pr.defined() && m.se.defined() && *m.pr.value + *m.se.value > 0) {
      const double harmonic = 2 * *m.pr.value * *m.se.value / (*m.pr.value + *m.se.value);
      CHECK(*m.f1.value == doctest::Approx(harmonic).epsilon(1e-12));
    }
  }
}

TEST_CASE("auc examples") {
  CHECK(auc(std::vector<double>{0.1, 0.4, 0.35, 0.8},
            std::vector<Label>{Label::NonBwv, Label::NonBwv, Label::Bwv, Label::Bwv}) == 0.75);
  CHECK(auc(std::vector<double>{0.9, 0.7, 0.2, 0.1},
            std::vector<Label>{Label::Bwv, Label::Bwv, Label::NonBwv, Label::NonBwv}) == 1.0);
  CHECK(auc(std::vector<double>(6, 0.3),
            std::vector<Label>{Label::Bwv, Label::NonBwv, Label::Bwv, Label::NonBwv, Label::NonBwv,
                               Label::Bwv}) == 0.5);
  CHECK_THROWS_AS(auc(std::vector<double>{0.1, 0.2}, std::vector<Label>{Label::Bwv, Label::Bwv}),
                  InvalidInput);
  CHECK_THROWS_AS(auc(std::vector<double>{0.1, NAN},
                      std::vector<Label>{Label::Bwv, Label::NonBwv}),
                  InvalidInput);
}

TEST_CASE("auc matches pairwise and trapezoid oracles") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coarse(0, 6);  // coarse scores force ties
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 15;
    const auto labels = random_labels(rng, n);
    std::vector<double> scores(n);
    for (double& s : scores) s = coarse(rng) / 6.0;
    const double a = auc(scores, labels);
    CHECK(a == pairwise_auc(scores, labels));
    CHECK(a == doctest::Approx(trapezoid_auc(scores, labels)).epsilon(1e-12));

    // strictly monotone transform
    std::vector<double> warped(n);
    for (std::size_t i = 0; i < n; ++i) warped[i] = std::exp(3 * scores[i]) - 7;
    CHECK(auc(warped, labels) == a);

    // swapping classes mirrors the area
    std::vector<Label> swapped(n);
    for (std::size_t i = 0; i < n; ++i) {
      swapped[i] = labels[i] == Label::Bwv ? Label::NonBwv : Label::Bwv;
    }
    CHECK(auc(scores, swapped) == doctest::Approx(1 - a).epsilon(1e-12));
  }
}

TEST_CASE("balanced accuracy is not auc") {
  const Ratio b = balanced_accuracy({4, 0, 1, 15});
  CHECK(*b.value == doctest::Approx(0.9));
  CHECK_FALSE(balanced_accuracy({0, 1, 0, 1}).defined());
}
