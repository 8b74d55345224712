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

#include "mida/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mida/data_io.hpp"

namespace mida::synth {
namespace {

enum class Stream : std::uint32_t { kAssignment = 1, kUser = 2, kReport = 3 };

// Independent generator per (seed, stream, index).
std::mt19937_64 SubStream(std::uint64_t seed, Stream stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

void FillRow(CountMatrix& m, Eigen::Index row, int n_signal, double signal_mean,
             double background_mean, std::mt19937_64& rng) {
  std::poisson_distribution<std::int32_t> signal(signal_mean);
  std::poisson_distribution<std::int32_t> background(background_mean);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    m(row, j) = j < n_signal ? signal(rng) : background(rng);
  }
}

std::string PaddedId(char prefix, int i, int n) {
  const int width = std::max(1, static_cast<int>(std::to_string(std::max(n - 1, 0)).size()));
  std::string digits = std::to_string(i);
  return std::string(1, prefix) +
         std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') +
         digits;
}

}  // namespace

void SynthConfig::validate() const {
  std::ostringstream bad;
  if (n_users < 1) bad << " n_users must be >= 1;";
  if (!(positive_fraction > 0.0 && positive_fraction < 1.0)) bad << " positive_fraction must be in (0, 1);";
  if (tweets_min < 1 || tweets_max < tweets_min) bad << " need 1 <= tweets_min <= tweets_max;";
  if (num_keywords < 1) bad << " num_keywords must be >= 1;";
  if (n_signal < 1 || n_signal > num_keywords) bad << " need 1 <= n_signal <= num_keywords;";
  if (n_reports < 0) bad << " n_reports must be >= 0;";
  if (!(background_rate > 0.0)) bad << " background_rate must be > 0;";
  if (!(signal_rate > background_rate)) bad << " signal_rate must exceed background_rate;";
  if (!(report_shift >= 0.0)) bad << " report_shift must be >= 0;";
  const std::string msg = bad.str();
  if (!msg.empty()) throw ConfigError("invalid synthetic config:" + msg);
}

int SynthConfig::num_positive() const {
  return static_cast<int>(std::lround(positive_fraction * n_users));
}

SynthResult generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthResult out;
  std::vector<std::string> keywords;
  for (int j = 0; j < cfg.num_keywords; ++j) keywords.push_back(PaddedId('k', j, cfg.num_keywords));
  out.dataset.vocabulary = KeywordVocabulary(std::move(keywords));

  std::vector<int> order(static_cast<std::size_t>(cfg.n_users));
  std::iota(order.begin(), order.end(), 0);
  auto assign_rng = SubStream(cfg.seed, Stream::kAssignment, 0);
  std::shuffle(order.begin(), order.end(), assign_rng);
  std::vector<int> labels(static_cast<std::size_t>(cfg.n_users), 0);
  for (int i = 0; i < cfg.num_positive(); ++i) labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;

  out.dataset.bags.reserve(static_cast<std::size_t>(cfg.n_users));
  for (int u = 0; u < cfg.n_users; ++u) {
    auto rng = SubStream(cfg.seed, Stream::kUser, static_cast<std::uint64_t>(u));
    std::uniform_int_distribution<int> size_dist(cfg.tweets_min, cfg.tweets_max);
    const int n = size_dist(rng);
    UserBag bag{PaddedId('u', u, cfg.n_users), CountMatrix(n, cfg.num_keywords),
                labels[static_cast<std::size_t>(u)]};
    Eigen::Index adverse = -1;
    if (bag.label == 1) {
      adverse = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
      out.adverse_index[bag.user_id] = adverse;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double signal_mean = i == adverse ? cfg.signal_rate : cfg.background_rate;
      FillRow(bag.counts, i, cfg.n_signal, signal_mean, cfg.background_rate, rng);
    }
    out.dataset.bags.push_back(std::move(bag));
  }

  out.dataset.reports.counts.resize(cfg.n_reports, cfg.num_keywords);
  for (int i = 0; i < cfg.n_reports; ++i) {
    auto rng = SubStream(cfg.seed, Stream::kReport, static_cast<std::uint64_t>(i));
    FillRow(out.dataset.reports.counts, i, cfg.n_signal,
            cfg.signal_rate + cfg.report_shift, cfg.background_rate, rng);
  }

  // Unit weight per signal keyword; the intercept sits halfway between the
  // expected signal mass of a background and of an adverse tweet.
  out.ground_truth = Coefficients::zeros(static_cast<std::size_t>(cfg.num_keywords));
  out.ground_truth.beta.segment(1, cfg.n_signal).setOnes();
  out.ground_truth.beta(0) = -cfg.n_signal * (cfg.background_rate + cfg.signal_rate) / 2.0;
  return out;
}

void write_synthetic(const SynthResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw ValidationError("cannot write " + (dir / name).string());
    return os;
  };
  {
    auto os = open("reports.csv");
    io::write_reports_csv(os, result.dataset.vocabulary, result.dataset.reports);
  }
  {
    auto os = open("tweets.csv");
    io::write_tweets_csv(os, result.dataset.vocabulary, result.dataset.bags);
  }
  {
    auto os = open("labels.csv");
    io::write_labels_csv(os, result.dataset.bags);
  }
  {
    nlohmann::json j{
        {"vocabulary", result.dataset.vocabulary.keywords()},
        {"beta", std::vector<double>(result.ground_truth.beta.begin(),
                                     result.ground_truth.beta.end())},
        {"adverse_index", result.adverse_index}};
    auto os = open("ground_truth.json");
    os << j.dump(2) << '\n';
  }
}

}  // namespace mida::synth
