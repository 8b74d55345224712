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

// Synthetic two-domain corpus with a known answer.
//
// Every tweet draws Poisson(background_rate) counts on every keyword. A
// positive user has exactly one adverse tweet whose first n_signal keywords
// are Poisson(signal_rate) instead. Reports look like adverse tweets with the
// signal means raised by report_shift, mimicking the word-frequency gap
// between formal and informal language.

#ifndef MIDA_SYNTH_HPP_
#define MIDA_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "mida/core_model.hpp"

namespace mida::synth {

struct SynthConfig {
  int n_users = 1000;
  double positive_fraction = 0.36;
  int tweets_min = 1;
  int tweets_max = 8;
  int num_keywords = 50;
  int n_signal = 10;  // keywords 0 .. n_signal-1 carry the signal
  int n_reports = 2000;
  double background_rate = 0.15;
  double signal_rate = 1.0;
  double report_shift = 0.5;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
  int num_positive() const;
};

struct SynthResult {
  Dataset dataset;
  Coefficients ground_truth;
  std::map<std::string, Eigen::Index> adverse_index;  // positive users only
};

SynthResult generate(const SynthConfig& cfg);

// reports.csv, tweets.csv, labels.csv and ground_truth.json under dir.
void write_synthetic(const SynthResult& result, const std::filesystem::path& dir);

}  // namespace mida::synth

#endif  // MIDA_SYNTH_HPP_
