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

#include "mida/core_model.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "mida/mmd.hpp"

namespace mida {

KeywordVocabulary::KeywordVocabulary(std::vector<std::string> keywords)
    : keywords_(std::move(keywords)) {
  if (keywords_.empty()) {
    throw ValidationError("vocabulary must contain at least one keyword");
  }
  for (std::size_t j = 0; j < keywords_.size(); ++j) {
    const std::string& kw = keywords_[j];
    if (kw.empty()) {
      throw ValidationError("empty keyword at position " + std::to_string(j));
    }
    for (unsigned char ch : kw) {
      if (std::isupper(ch)) {
        throw ValidationError("keyword \"" + kw + "\" is not lowercase");
      }
    }
    if (!index_.emplace(kw, j).second) {
      throw ValidationError("duplicate keyword \"" + kw + "\"");
    }
  }
}

std::optional<std::size_t> KeywordVocabulary::index_of(
    const std::string& keyword) const {
  auto it = index_.find(keyword);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Hyperparams::validate() const {
  std::ostringstream bad;
  if (!(lambda1 > 0)) bad << " lambda1 must be > 0;";
  if (!(lambda2 >= 0)) bad << " lambda2 must be >= 0;";
  if (!(rho0 > 0)) bad << " rho must be > 0;";
  if (partitions < 1) bad << " partitions must be >= 1;";
  if (!(eta > 0)) bad << " eta must be > 0;";
  if (max_outer < 1) bad << " max_outer must be >= 1;";
  if (max_fista < 1) bad << " max_fista must be >= 1;";
  if (max_ccp < 1) bad << " max_ccp must be >= 1;";
  if (!(tol_abs > 0)) bad << " tol_abs must be > 0;";
  if (!(tol_rel > 0)) bad << " tol_rel must be > 0;";
  const std::string msg = bad.str();
  if (!msg.empty()) throw ConfigError("invalid hyperparameters:" + msg);
}

std::optional<std::string> Hyperparams::stability_warning(double rho) const {
  if (lambda2 > 0 && rho < 10.0 * lambda2) {
    std::ostringstream os;
    os << "rho = " << rho << " is below 10 * lambda2 = " << 10.0 * lambda2
       << "; the beta-update may diverge";
    return os.str();
  }
  return std::nullopt;
}

void Dataset::validate() const {
  const auto k = static_cast<Eigen::Index>(vocabulary.size());
  if (k == 0) throw ValidationError("dataset has an empty vocabulary");
  if (reports.size() > 0 && reports.counts.cols() != k) {
    throw DimensionError("reports have " +
                         std::to_string(reports.counts.cols()) +
                         " columns, vocabulary has " + std::to_string(k));
  }
  if (reports.size() > 0 && (reports.counts.array() < 0).any()) {
    throw ValidationError("reports contain negative counts");
  }
  for (const UserBag& bag : bags) {
    if (bag.size() == 0) {
      throw EmptyBagError("user " + bag.user_id + " has no instances");
    }
    if (bag.counts.cols() != k) {
      throw DimensionError("user " + bag.user_id + " has " +
                           std::to_string(bag.counts.cols()) +
                           " columns, vocabulary has " + std::to_string(k));
    }
    if ((bag.counts.array() < 0).any()) {
      throw ValidationError("user " + bag.user_id + " has negative counts");
    }
    if (bag.label != 0 && bag.label != 1) {
      throw ValidationError("user " + bag.user_id + " has label " +
                            std::to_string(bag.label));
    }
  }
}

std::vector<std::size_t> Dataset::positive_users() const {
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < bags.size(); ++u) {
    if (bags[u].label == 1) out.push_back(u);
  }
  return out;
}

double log1p_exp(double s) {
  if (s > 0) return s + std::log1p(std::exp(-s));
  return std::log1p(std::exp(s));
}

double logistic(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double representative_loss(double score, int label) {
  return log1p_exp(score) - static_cast<double>(label) * score;
}

DesignMatrix build_design_matrix(const UserBag& bag,
                                 std::size_t num_keywords) {
  if (bag.counts.cols() != static_cast<Eigen::Index>(num_keywords)) {
    throw DimensionError("user " + bag.user_id + " has " +
                         std::to_string(bag.counts.cols()) +
                         " keyword columns, expected " +
                         std::to_string(num_keywords));
  }
  DesignMatrix x(bag.size(), bag.counts.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(bag.counts.cols()) = bag.counts.cast<double>();
  return x;
}

Eigen::VectorXd instance_scores(const DesignMatrix& x,
                                const Coefficients& beta) {
  if (x.cols() != beta.size()) {
    throw DimensionError("design matrix has " + std::to_string(x.cols()) +
                         " columns, beta has " + std::to_string(beta.size()) +
                         " entries");
  }
  return x * beta.beta;
}

Eigen::VectorXd bag_scores(const UserBag& bag, const Coefficients& beta) {
  if (bag.counts.cols() + 1 != beta.size()) {
    throw DimensionError("user " + bag.user_id + " has " +
                         std::to_string(bag.counts.cols()) +
                         " keyword columns, beta has " +
                         std::to_string(beta.size()) + " entries");
  }
  // Same product as instance_scores so every scoring path rounds alike and
  // representative selection agrees between them bit for bit.
  return build_design_matrix(bag, static_cast<std::size_t>(bag.counts.cols())) *
         beta.beta;
}

Eigen::Index select_representative(
    const Eigen::Ref<const Eigen::VectorXd>& scores) {
  if (scores.size() == 0) throw EmptyBagError("empty score vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores(i) > scores(best)) best = i;
  }
  return best;
}

double user_probability(const Coefficients& beta, const UserBag& bag) {
  if (bag.size() == 0) throw EmptyBagError("user " + bag.user_id + " is empty");
  const Eigen::VectorXd s = bag_scores(bag, beta);
  return logistic(s(select_representative(s)));
}

double user_loss(const Coefficients& beta, const UserBag& bag) {
  if (bag.size() == 0) throw EmptyBagError("user " + bag.user_id + " is empty");
  const Eigen::VectorXd s = bag_scores(bag, beta);
  return representative_loss(s(select_representative(s)), bag.label);
}

double full_objective(const Coefficients& beta, const Dataset& data,
                      const MmdWeights& weights, const Hyperparams& hyper) {
  double loss = 0.0;
  for (const UserBag& bag : data.bags) loss += user_loss(beta, bag);
  double value = loss + hyper.lambda1 * beta.beta.lpNorm<1>();
  if (hyper.lambda2 != 0.0 && !weights.empty()) {
    value += hyper.lambda2 * mmd::mmd_distance(beta, weights);
  }
  if (!std::isfinite(value)) {
    throw DivergenceError("objective is not finite");
  }
  return value;
}

}  // namespace mida
