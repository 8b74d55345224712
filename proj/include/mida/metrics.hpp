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

#ifndef MIDA_METRICS_HPP_
#define MIDA_METRICS_HPP_

#include <ostream>
#include <span>
#include <vector>

#include "mida/errors.hpp"

namespace mida::metrics {

struct ScoredLabel {
  double score;  // probability in [0, 1]
  int label;     // 0 or 1
};

struct CurvePoint {
  double x;
  double y;
  double threshold;
};

struct ThresholdMetrics {
  double acc;
  double pr;
  double re;
  double fs;
};

// Predicts positive when score >= threshold. Precision is 0 when nothing is
// predicted positive, recall is 0 when there are no positives, and the
// F-score is 0 when both are 0.
ThresholdMetrics threshold_metrics(std::span<const ScoredLabel> scored,
                                   double threshold);

// F-score from precision and recall.
double harmonic_mean(double precision, double recall);

struct Curve {
  double area;
  std::vector<CurvePoint> points;  // thresholds in decreasing order
};

// (FPR, TPR) at each distinct threshold, starting from (0, 0) at +inf;
// area by the trapezoidal rule.
Curve roc_auc(std::span<const ScoredLabel> scored);

// (recall, precision) at each distinct threshold; area is the average
// precision sum_k (R_k - R_{k-1}) P_k.
Curve pr_aupr(std::span<const ScoredLabel> scored);

// `threshold,x,y` header plus one row per point.
void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& points);

}  // namespace mida::metrics

#endif  // MIDA_METRICS_HPP_
