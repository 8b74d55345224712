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

#include "mida/mmd.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace mida::mmd {
namespace {

std::vector<std::vector<std::size_t>> RoundRobin(std::size_t n,
                                                 std::size_t chunks,
                                                 std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out(chunks);
  for (std::size_t t = 0; t < n; ++t) out[t % chunks].push_back(order[t]);
  // Sorted members keep the c = 1 reduction in natural row order.
  for (auto& chunk : out) std::sort(chunk.begin(), chunk.end());
  return out;
}

void CheckWidths(const RealMatrix& reports, const RealMatrix& selected) {
  if (reports.rows() > 0 && selected.rows() > 0 &&
      reports.cols() != selected.cols()) {
    throw DimensionError("reports have " + std::to_string(reports.cols()) +
                         " columns, representatives have " +
                         std::to_string(selected.cols()));
  }
}

// Column sums and column sums of squares over a subset of rows.
struct Moments {
  Eigen::VectorXd sum;
  Eigen::VectorXd sum_sq;
};

Moments ChunkMoments(const RealMatrix& m, const std::vector<std::size_t>& rows) {
  Moments out{Eigen::VectorXd::Zero(m.cols()), Eigen::VectorXd::Zero(m.cols())};
  for (std::size_t i : rows) {
    const auto row = m.row(static_cast<Eigen::Index>(i)).transpose();
    out.sum += row;
    out.sum_sq += row.cwiseAbs2();
  }
  return out;
}

}  // namespace

PartitionPlan partition(std::size_t r, std::size_t n_p, std::size_t c,
                        std::uint64_t seed) {
  if (c < 1) throw ConfigError("partition count must be >= 1");
  const std::size_t chunks = std::max<std::size_t>(1, std::min(c, std::max(r, n_p)));
  PartitionPlan plan;
  plan.c = c;
  std::mt19937_64 report_rng(seed);
  std::mt19937_64 user_rng(seed ^ 0x9E3779B97F4A7C15ULL);
  plan.report_chunks = RoundRobin(r, chunks, report_rng);
  plan.user_chunks = RoundRobin(n_p, chunks, user_rng);
  return plan;
}

RealMatrix representative_rows(const Dataset& data,
                               const std::vector<Eigen::Index>& rep_index) {
  if (rep_index.size() != data.bags.size()) {
    throw DimensionError("representative index covers " +
                         std::to_string(rep_index.size()) + " users, dataset has " +
                         std::to_string(data.bags.size()));
  }
  const std::vector<std::size_t> positives = data.positive_users();
  RealMatrix out(static_cast<Eigen::Index>(positives.size()),
                 static_cast<Eigen::Index>(data.num_keywords()));
  for (std::size_t row = 0; row < positives.size(); ++row) {
    const UserBag& bag = data.bags[positives[row]];
    out.row(static_cast<Eigen::Index>(row)) =
        bag.counts.row(rep_index[positives[row]]).cast<double>();
  }
  return out;
}

RealMatrix representative_rows(const Dataset& data, const Coefficients& beta) {
  std::vector<Eigen::Index> rep(data.bags.size(), 0);
  for (std::size_t u = 0; u < data.bags.size(); ++u) {
    if (data.bags[u].label == 1) {
      rep[u] = select_representative(bag_scores(data.bags[u], beta));
    }
  }
  return representative_rows(data, rep);
}

Eigen::VectorXd cross_domain_weights(const RealMatrix& reports,
                                     const RealMatrix& selected,
                                     const PartitionPlan& plan) {
  CheckWidths(reports, selected);
  const Eigen::Index k = std::max(reports.cols(), selected.cols());
  Eigen::VectorXd a = Eigen::VectorXd::Zero(k);
  if (reports.rows() == 0 || selected.rows() == 0) return a;

  const std::size_t pairs =
      std::min(plan.report_chunks.size(), plan.user_chunks.size());
  std::size_t used = 0;
  for (std::size_t t = 0; t < pairs; ++t) {
    const auto& rc = plan.report_chunks[t];
    const auto& uc = plan.user_chunks[t];
    if (rc.empty() || uc.empty()) continue;
    const Moments rm = ChunkMoments(reports, rc);
    const Moments um = ChunkMoments(selected, uc);
    const double nr = static_cast<double>(rc.size());
    const double nu = static_cast<double>(uc.size());
    // sum_i sum_u (R_i - d_u)^2 = nu sum R^2 - 2 (sum R)(sum d) + nr sum d^2.
    // Cancellation can leave tiny negatives on constant columns; both weights
    // are clamped at zero below.
    Eigen::VectorXd pair_sum = nu * rm.sum_sq -
                               2.0 * rm.sum.cwiseProduct(um.sum) +
                               nr * um.sum_sq;
    a += pair_sum / (nr * nu);
    ++used;
  }
  if (used > 0) a /= static_cast<double>(used);
  return a.cwiseMax(0.0);
}

Eigen::VectorXd within_domain_weights(const RealMatrix& selected,
                                      const PartitionPlan& plan) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(selected.cols());
  if (selected.rows() == 0) return b;
  std::size_t used = 0;
  for (const auto& uc : plan.user_chunks) {
    if (uc.empty()) continue;
    const Moments m = ChunkMoments(selected, uc);
    const double n = static_cast<double>(uc.size());
    // sum_{u1,u2} (d1 - d2)^2 = 2 n sum d^2 - 2 (sum d)^2
    b += (2.0 * n * m.sum_sq - 2.0 * m.sum.cwiseAbs2()) / (n * n);
    ++used;
  }
  if (used > 0) b /= static_cast<double>(used);
  return b.cwiseMax(0.0);
}

MmdWeights compute_weights(const RealMatrix& reports, const RealMatrix& selected,
                           const PartitionPlan& plan) {
  CheckWidths(reports, selected);
  const Eigen::Index k = std::max(reports.cols(), selected.cols());
  MmdWeights w{Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k),
               static_cast<std::size_t>(selected.rows()),
               static_cast<std::size_t>(reports.rows())};
  if (w.empty()) return w;
  w.a = cross_domain_weights(reports, selected, plan);
  w.b = within_domain_weights(selected, plan);
  return w;
}

double mmd_distance(const Coefficients& beta, const MmdWeights& w) {
  if (w.empty()) return 0.0;
  if (beta.size() != w.a.size() + 1) {
    throw DimensionError("beta has " + std::to_string(beta.size()) +
                         " entries, MMD weights cover " +
                         std::to_string(w.a.size()) + " keywords");
  }
  const auto weights = beta.beta.tail(w.a.size());
  return ((2.0 * w.a - w.b).array() * weights.array().square()).sum();
}

double brute_force_mmd(const RealMatrix& reports, const RealMatrix& selected,
                       const Coefficients& beta) {
  const Eigen::Index r = reports.rows();
  const Eigen::Index np = selected.rows();
  if (r == 0 || np == 0) return 0.0;
  CheckWidths(reports, selected);
  const Eigen::Index k = selected.cols();

  double cross = 0.0;
  for (Eigen::Index u = 0; u < np; ++u) {
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        const double diff = selected(u, j) - reports(i, j);
        cross += diff * diff * beta.beta(j + 1) * beta.beta(j + 1);
      }
    }
  }
  double within = 0.0;
  for (Eigen::Index u1 = 0; u1 < np; ++u1) {
    for (Eigen::Index u2 = 0; u2 < np; ++u2) {
      for (Eigen::Index j = 0; j < k; ++j) {
        const double diff = selected(u1, j) - selected(u2, j);
        within += diff * diff * beta.beta(j + 1) * beta.beta(j + 1);
      }
    }
  }
  return 2.0 * cross / (static_cast<double>(r) * static_cast<double>(np)) -
         within / (static_cast<double>(np) * static_cast<double>(np));
}

}  // namespace mida::mmd
