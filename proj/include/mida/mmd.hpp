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

// Generalized MMD between the report domain and the representative
// instances of positive users.
//
// With the triangular kernel Ker(x, y) = -|x - y|^2 under the beta-weighted
// norm |x|^2 = sum_j x_j^2 beta_{j+1}^2, the squared distance collapses to a
// diagonal quadratic in the keyword weights:
//
//   Dist^2(beta) = sum_j (2 A_j - B_j) beta_{j+1}^2
//
// where A_j is the mean squared report-vs-user difference of keyword j and
// B_j the mean squared user-vs-user difference. The constant report-vs-report
// term is dropped. Large populations are split into c chunks; each chunk is
// normalised by its own sizes and chunk values are averaged, so c = 1 gives
// the exact global weights.

#ifndef MIDA_MMD_HPP_
#define MIDA_MMD_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mida/core_model.hpp"

namespace mida {

struct MmdWeights {
  Eigen::VectorXd a;  // cross-domain term, length |K|
  Eigen::VectorXd b;  // within-domain term, length |K|
  std::size_t n_p = 0;
  std::size_t r = 0;

  static MmdWeights zeros(std::size_t num_keywords) {
    const auto k = static_cast<Eigen::Index>(num_keywords);
    return MmdWeights{Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k), 0, 0};
  }
  // True when the MMD term is identically zero (r = 0 or n_p = 0).
  bool empty() const { return r == 0 || n_p == 0; }
};

namespace mmd {

// Disjoint index chunks over report rows and over rows of the representative
// matrix. Chunk i of reports pairs with chunk i of users.
struct PartitionPlan {
  std::vector<std::vector<std::size_t>> report_chunks;
  std::vector<std::vector<std::size_t>> user_chunks;
  std::size_t c = 1;
};

// Seeded shuffle of each domain, then round-robin into
// min(c, max(r, n_p)) chunks per side.
PartitionPlan partition(std::size_t r, std::size_t n_p, std::size_t c,
                        std::uint64_t seed);

// Row u is the counts of positive user u's representative instance under
// beta (positive users in bag order). Zero rows when there are no positives.
RealMatrix representative_rows(const Dataset& data, const Coefficients& beta);
// Same, for representatives already chosen; rep_index is indexed by bag.
RealMatrix representative_rows(const Dataset& data,
                               const std::vector<Eigen::Index>& rep_index);

Eigen::VectorXd cross_domain_weights(const RealMatrix& reports,
                                     const RealMatrix& selected,
                                     const PartitionPlan& plan);
Eigen::VectorXd within_domain_weights(const RealMatrix& selected,
                                      const PartitionPlan& plan);

// Both terms together; zero weights whenever either domain is empty.
MmdWeights compute_weights(const RealMatrix& reports,
                           const RealMatrix& selected,
                           const PartitionPlan& plan);

// sum_j (2 A_j - B_j) beta_{j+1}^2. May be negative.
double mmd_distance(const Coefficients& beta, const MmdWeights& w);

// Literal all-pairs evaluation of the weighted MMD (no chunking). Reference
// path for tests; cost O(r n_p |K| + n_p^2 |K|).
double brute_force_mmd(const RealMatrix& reports, const RealMatrix& selected,
                       const Coefficients& beta);

}  // namespace mmd
}  // namespace mida

#endif  // MIDA_MMD_HPP_
