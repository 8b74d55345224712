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

// Data model and the max-rule multi-instance logistic loss.
//
// A user is a bag of instances (keyword-count rows). The probability that a
// user is positive is the largest per-instance logistic probability, so only
// the highest-scoring ("representative") instance of each bag enters the
// loss. Column 0 of every design matrix is the intercept; column j + 1 holds
// the count of keyword j.

#ifndef MIDA_CORE_MODEL_HPP_
#define MIDA_CORE_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "mida/errors.hpp"

namespace mida {

using CountMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic,
                                  Eigen::RowMajor>;
using RealMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// n_u x (|K| + 1): a column of ones followed by the bag's counts.
using DesignMatrix = RealMatrix;

// Ordered set of distinct lowercase keywords. Column j of every count matrix
// refers to keywords()[j].
class KeywordVocabulary {
 public:
  KeywordVocabulary() = default;
  explicit KeywordVocabulary(std::vector<std::string> keywords);

  std::size_t size() const { return keywords_.size(); }
  const std::string& operator[](std::size_t j) const { return keywords_[j]; }
  const std::vector<std::string>& keywords() const { return keywords_; }
  std::optional<std::size_t> index_of(const std::string& keyword) const;

  friend bool operator==(const KeywordVocabulary& a,
                         const KeywordVocabulary& b) {
    return a.keywords_ == b.keywords_;
  }

 private:
  std::vector<std::string> keywords_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct UserBag {
  std::string user_id;
  CountMatrix counts;  // n_u x |K|, non-negative
  int label = 0;       // Y_u in {0, 1}

  Eigen::Index size() const { return counts.rows(); }
};

// Source-domain reports. Every report is implicitly positive; zero rows means
// there is no source domain.
struct ReportSet {
  CountMatrix counts;  // r x |K|

  Eigen::Index size() const { return counts.rows(); }
};

// beta(0) is the intercept, beta(j + 1) the weight of keyword j.
struct Coefficients {
  Eigen::VectorXd beta;

  static Coefficients zeros(std::size_t num_keywords) {
    return Coefficients{Eigen::VectorXd::Zero(
        static_cast<Eigen::Index>(num_keywords) + 1)};
  }
  Eigen::Index size() const { return beta.size(); }
  bool all_finite() const { return beta.allFinite(); }
};

struct Hyperparams {
  double lambda1 = 0.01;   // l1 weight (intercept included)
  double lambda2 = 1.0;    // MMD weight
  double rho0 = 20.0;      // initial ADMM penalty
  int partitions = 100;    // c, number of MMD data-splitting chunks
  double eta = 1.0;        // FISTA step of the S-update
  int max_outer = 20;
  int max_fista = 5000;
  int max_ccp = 50;
  double tol_abs = 1e-6;
  double tol_rel = 1e-6;
  bool adaptive_rho = false;
  std::uint64_t seed = 0;

  // Throws ConfigError on out-of-range values.
  void validate() const;

  // Non-empty when rho < 10 * lambda2; the CCP step is known to run away
  // in that regime. Never fatal.
  std::optional<std::string> stability_warning(double rho) const;
  std::optional<std::string> stability_warning() const {
    return stability_warning(rho0);
  }
};

struct Dataset {
  KeywordVocabulary vocabulary;
  std::vector<UserBag> bags;
  ReportSet reports;

  // Throws DimensionError / ValidationError / EmptyBagError.
  void validate() const;
  // Bag positions with label 1, in bag order.
  std::vector<std::size_t> positive_users() const;
  std::size_t num_keywords() const { return vocabulary.size(); }
};

struct MmdWeights;  // mida/mmd.hpp

// Numerically stable log(1 + exp(s)).
double log1p_exp(double s);
// Numerically stable 1 / (1 + exp(-s)).
double logistic(double s);
// log(1 + exp(s)) - y * s, the loss of a bag whose representative score is s.
double representative_loss(double score, int label);

DesignMatrix build_design_matrix(const UserBag& bag, std::size_t num_keywords);

// Pre-logit scores X * beta, one per instance.
Eigen::VectorXd instance_scores(const DesignMatrix& x,
                                const Coefficients& beta);
// Same values, from the bag directly.
Eigen::VectorXd bag_scores(const UserBag& bag, const Coefficients& beta);

// argmax of the scores; ties go to the lowest index.
Eigen::Index select_representative(const Eigen::Ref<const Eigen::VectorXd>& scores);

// sigma(max_i X_i beta).
double user_probability(const Coefficients& beta, const UserBag& bag);
double user_loss(const Coefficients& beta, const UserBag& bag);

// sum_u Loss_u + lambda1 * |beta|_1 + lambda2 * Dist^2. The weights must have
// been computed for the representatives selected by this beta.
double full_objective(const Coefficients& beta, const Dataset& data,
                      const MmdWeights& weights, const Hyperparams& hyper);

}  // namespace mida

#endif  // MIDA_CORE_MODEL_HPP_
