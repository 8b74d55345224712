// Copyright 2026 The MIDA Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mida/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mida::metrics {
namespace {

void Validate(std::span<const ScoredLabel> scored) {
  if (scored.empty()) throw EmptyInputError("no scored samples");
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const ScoredLabel& s = scored[i];
    if (!(s.score >= 0.0 && s.score <= 1.0)) {
      throw ValidationError("sample " + std::to_string(i) + " has score " +
                            std::to_string(s.score) + " outside [0, 1]");
    }
    if (s.label != 0 && s.label != 1) {
      throw ValidationError("sample " + std::to_string(i) + " has label " +
                            std::to_string(s.label));
    }
  }
}

// Cumulative (threshold, TP, FP) after admitting every sample scoring at or
// above each distinct threshold, highest threshold first.
struct Step {
  double threshold;
  double tp;
  double fp;
};

std::vector<Step> Sweep(std::span<const ScoredLabel> scored) {
  std::vector<ScoredLabel> sorted(scored.begin(), scored.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredLabel& a, const ScoredLabel& b) {
                     return a.score > b.score;
                   });
  std::vector<Step> steps;
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    (sorted[i].label == 1 ? tp : fp) += 1;
    if (i + 1 == sorted.size() || sorted[i + 1].score != sorted[i].score) {
      steps.push_back({sorted[i].score, tp, fp});
    }
  }
  return steps;
}

}  // namespace

double harmonic_mean(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

ThresholdMetrics threshold_metrics(std::span<const ScoredLabel> scored,
                                   double threshold) {
  Validate(scored);
  double tp = 0, fp = 0, tn = 0, fn = 0;
  for (const ScoredLabel& s : scored) {
    const bool predicted = s.score >= threshold;
    if (predicted) {
      (s.label == 1 ? tp : fp) += 1;
    } else {
      (s.label == 1 ? fn : tn) += 1;
    }
  }
  ThresholdMetrics m;
  m.acc = (tp + tn) / static_cast<double>(scored.size());
  m.pr = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  m.re = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  m.fs = harmonic_mean(m.pr, m.re);
  return m;
}

Curve roc_auc(std::span<const ScoredLabel> scored) {
  Validate(scored);
  const auto positives = static_cast<double>(
      std::count_if(scored.begin(), scored.end(),
                    [](const ScoredLabel& s) { return s.label == 1; }));
  const double negatives = static_cast<double>(scored.size()) - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetricError("ROC AUC needs both positive and negative labels");
  }
  Curve c{0.0, {}};
  c.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double prev_x = 0.0, prev_y = 0.0;
  for (const Step& st : Sweep(scored)) {
    const double x = st.fp / negatives;
    const double y = st.tp / positives;
    c.area += (x - prev_x) * (y + prev_y) / 2.0;
    c.points.push_back({x, y, st.threshold});
    prev_x = x;
    prev_y = y;
  }
  return c;
}

Curve pr_aupr(std::span<const ScoredLabel> scored) {
  Validate(scored);
  const auto positives = static_cast<double>(
      std::count_if(scored.begin(), scored.end(),
                    [](const ScoredLabel& s) { return s.label == 1; }));
  if (positives == 0) {
    throw UndefinedMetricError("PR curve needs at least one positive label");
  }
  Curve c{0.0, {}};
  double prev_recall = 0.0;
  for (const Step& st : Sweep(scored)) {
    const double recall = st.tp / positives;
    const double precision = st.tp / (st.tp + st.fp);
    c.area += (recall - prev_recall) * precision;
    c.points.push_back({recall, precision, st.threshold});
    prev_recall = recall;
  }
  return c;
}

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& points) {
  const auto old_precision = os.precision(17);
  os << "threshold,x,y\n";
  for (const CurvePoint& p : points) {
    if (std::isinf(p.threshold)) {
      os << "inf";
    } else {
      os << p.threshold;
    }
    os << ',' << p.x << ',' << p.y << '\n';
  }
  os.precision(old_precision);
}

}  // namespace mida::metrics
