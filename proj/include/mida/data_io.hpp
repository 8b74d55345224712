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

// File formats.
//
//   reports CSV  report_id,<kw1>,...,<kwK>           integer counts
//   tweets CSV   user_id,tweet_id,<kw1>,...,<kwK>    integer counts
//   labels CSV   user_id,label                       label in {0, 1}
//   model        versioned JSON: version, vocabulary, beta, hyperparams,
//                trace_summary, checksum
//
// Cells are separated by commas and carry no quoting. Row numbers in errors
// count data rows from 1; row 0 is the header.

#ifndef MIDA_DATA_IO_HPP_
#define MIDA_DATA_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mida/core_model.hpp"
#include "mida/solver.hpp"

namespace mida::io {

inline constexpr int kModelFormatVersion = 1;

struct LoadedBags {
  KeywordVocabulary vocabulary;
  std::vector<UserBag> bags;  // first-appearance order of user ids
};

ReportSet load_reports(const std::filesystem::path& path,
                       const KeywordVocabulary& vocab);

// Tweets only; every bag gets label 0. Used for scoring.
LoadedBags load_tweets(const std::filesystem::path& tweets_path);

std::vector<std::pair<std::string, int>> load_labels(
    const std::filesystem::path& labels_path);

// Tweets joined with labels. Every tweeting user needs exactly one label row
// and every labelled user at least one tweet.
LoadedBags load_bags(const std::filesystem::path& tweets_path,
                     const std::filesystem::path& labels_path);

Dataset load_dataset(const std::filesystem::path& reports_path,
                     const std::filesystem::path& tweets_path,
                     const std::filesystem::path& labels_path);

// Lowercases, splits on runs of non-alphanumeric characters and counts exact
// keyword matches. Unknown tokens are ignored.
std::vector<std::int32_t> vectorize_text(const std::string& text,
                                         const KeywordVocabulary& vocab);

// Drops all-zero instances, keeping one if nothing else remains.
UserBag prune_bag(const UserBag& bag);

void write_reports_csv(std::ostream& os, const KeywordVocabulary& vocab,
                       const ReportSet& reports);
void write_tweets_csv(std::ostream& os, const KeywordVocabulary& vocab,
                      const std::vector<UserBag>& bags);
void write_labels_csv(std::ostream& os, const std::vector<UserBag>& bags);

std::string model_to_json(const solver::Model& model);
solver::Model model_from_json(const std::string& text);
void save_model(const solver::Model& model, const std::filesystem::path& path);
solver::Model load_model(const std::filesystem::path& path);

}  // namespace mida::io

#endif  // MIDA_DATA_IO_HPP_
