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

#include "mida/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mida/data_io.hpp"
#include "mida/metrics.hpp"
#include "mida/solver.hpp"
#include "mida/synth.hpp"

namespace mida::cli {
namespace {

namespace fs = std::filesystem;

struct TrainFlags {
  std::string reports, tweets, labels, out, trace, holdout_labels;
  double holdout_fraction = 0.0;
  bool no_prune = false;
  int threads = 1;
  Hyperparams hyper;
};

struct PredictFlags {
  std::string model, tweets, out;
  bool no_prune = false;
};

struct EvaluateFlags {
  std::string scores, labels, out, roc, pr;
  double threshold = 0.5;
};

struct SynthFlags {
  std::string out_dir;
  synth::SynthConfig cfg;
};

std::ofstream OpenOut(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot write " + path.string());
  return os;
}

fs::path Sibling(const std::string& anchor, const char* name) {
  return fs::path(anchor).parent_path() / name;
}

std::vector<UserBag> MaybePrune(std::vector<UserBag> bags, bool no_prune) {
  if (no_prune) return bags;
  for (UserBag& bag : bags) bag = io::prune_bag(bag);
  return bags;
}

// Stratified by label so both classes appear on both sides of the split.
std::vector<bool> HoldoutMask(const std::vector<UserBag>& bags, double fraction,
                              std::uint64_t seed) {
  std::vector<bool> held(bags.size(), false);
  std::mt19937_64 rng(seed);
  for (int y : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t u = 0; u < bags.size(); ++u) {
      if (bags[u].label == y) idx.push_back(u);
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto take = static_cast<std::size_t>(
        std::lround(fraction * static_cast<double>(idx.size())));
    for (std::size_t t = 0; t < take && t < idx.size(); ++t) held[idx[t]] = true;
  }
  return held;
}

int Train(const TrainFlags& f, std::ostream& out, std::ostream& err) {
  if (f.holdout_fraction < 0.0 || f.holdout_fraction >= 1.0) {
    throw ConfigError("--holdout-fraction must be in [0, 1)");
  }
  Dataset data = io::load_dataset(f.reports, f.tweets, f.labels);
  data.bags = MaybePrune(std::move(data.bags), f.no_prune);

  if (f.holdout_fraction > 0.0) {
    const std::vector<bool> held = HoldoutMask(data.bags, f.holdout_fraction, f.hyper.seed);
    std::vector<UserBag> train, test;
    for (std::size_t u = 0; u < data.bags.size(); ++u) {
      (held[u] ? test : train).push_back(std::move(data.bags[u]));
    }
    data.bags = std::move(train);
    const fs::path path = f.holdout_labels.empty()
                              ? Sibling(f.out, "holdout_labels.csv")
                              : fs::path(f.holdout_labels);
    auto os = OpenOut(path);
    io::write_labels_csv(os, test);
  }

  if (auto w = f.hyper.stability_warning()) err << "warning: " << *w << '\n';
  const solver::FitResult result =
      solver::fit(data, f.hyper, std::nullopt, solver::FitOptions{f.threads});
  for (const std::string& w : result.trace.warnings) {
    if (w != f.hyper.stability_warning().value_or("")) err << "warning: " << w << '\n';
  }

  if (fs::path(f.out).has_parent_path()) fs::create_directories(fs::path(f.out).parent_path());
  io::save_model(result.model, f.out);
  const fs::path trace_path = f.trace.empty() ? Sibling(f.out, "trace.csv") : fs::path(f.trace);
  auto os = OpenOut(trace_path);
  os.precision(17);
  os << "k,r_primal,s_dual,rho,objective,seconds\n";
  for (const auto& r : result.trace.records) {
    os << r.k << ',' << r.r_primal << ',' << r.s_dual << ',' << r.rho << ','
       << r.objective << ',' << r.seconds << '\n';
  }
  out << "trained on " << data.bags.size() << " users, " << data.reports.size()
      << " reports; " << result.trace.records.size() << " iterations"
      << (result.trace.converged ? " (converged)" : "") << '\n';
  return kExitOk;
}

int Predict(const PredictFlags& f, std::ostream& out) {
  if (!fs::exists(f.model)) throw ValidationError("model file not found: " + f.model);
  const solver::Model model = io::load_model(f.model);
  io::LoadedBags lb = io::load_tweets(f.tweets);
  if (!(lb.vocabulary == model.vocabulary)) {
    throw DimensionError("vocabulary of " + f.tweets + " does not match the model");
  }
  std::vector<UserBag> bags = MaybePrune(std::move(lb.bags), f.no_prune);
  std::sort(bags.begin(), bags.end(),
            [](const UserBag& a, const UserBag& b) { return a.user_id < b.user_id; });
  auto os = OpenOut(f.out);
  os.precision(17);
  os << "user_id,score\n";
  for (const UserBag& bag : bags) {
    os << bag.user_id << ',' << solver::predict(model, bag) << '\n';
  }
  out << "scored " << bags.size() << " users\n";
  return kExitOk;
}

std::map<std::string, double> LoadScores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  std::map<std::string, double> scores;
  std::size_t row = 0;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      if (line != "user_id,score") throw ParseError(path, 0, "", "expected header user_id,score");
      header = false;
      continue;
    }
    ++row;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(path, row, "score", "missing column");
    const std::string cell = line.substr(comma + 1);
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || *end != '\0') {
      throw ParseError(path, row, "score", "invalid number \"" + cell + "\"");
    }
    if (!scores.emplace(line.substr(0, comma), v).second) {
      throw ParseError(path, row, "user_id", "duplicate user " + line.substr(0, comma));
    }
  }
  return scores;
}

int Evaluate(const EvaluateFlags& f, std::ostream& out) {
  const auto scores = LoadScores(f.scores);
  const auto labels = io::load_labels(f.labels);
  std::vector<metrics::ScoredLabel> scored;
  std::vector<std::string> missing;
  for (const auto& [uid, y] : labels) {
    auto it = scores.find(uid);
    if (it == scores.end()) {
      missing.push_back(uid);
    } else {
      scored.push_back({it->second, y});
    }
  }
  if (!missing.empty()) {
    throw ValidationError(f.scores + ": no score for " + std::to_string(missing.size()) +
                          " labelled users (first: " + missing.front() + ")");
  }

  const metrics::ThresholdMetrics tm = metrics::threshold_metrics(scored, f.threshold);
  nlohmann::json j{{"acc", tm.acc}, {"pr", tm.pr},       {"re", tm.re},
                   {"fs", tm.fs},   {"threshold", f.threshold}, {"n", scored.size()},
                   {"auc", nullptr}, {"aupr", nullptr}};
  std::optional<std::string> failure;
  try {
    const metrics::Curve roc = metrics::roc_auc(scored);
    const metrics::Curve pr = metrics::pr_aupr(scored);
    j["auc"] = roc.area;
    j["aupr"] = pr.area;
    auto roc_os = OpenOut(f.roc.empty() ? Sibling(f.out, "roc.csv") : fs::path(f.roc));
    metrics::write_curve_csv(roc_os, roc.points);
    auto pr_os = OpenOut(f.pr.empty() ? Sibling(f.out, "pr.csv") : fs::path(f.pr));
    metrics::write_curve_csv(pr_os, pr.points);
  } catch (const UndefinedMetricError& e) {
    failure = e.what();
  }
  auto os = OpenOut(f.out);
  os << j.dump(2) << '\n';
  if (failure) throw UndefinedMetricError(*failure + " (threshold metrics written to " + f.out + ")");
  out << "auc " << j["auc"].get<double>() << ", aupr " << j["aupr"].get<double>() << '\n';
  return kExitOk;
}

int Synth(const SynthFlags& f, std::ostream& out) {
  const synth::SynthResult result = synth::generate(f.cfg);
  synth::write_synthetic(result, f.out_dir);
  out << "wrote " << result.dataset.bags.size() << " users and "
      << result.dataset.reports.size() << " reports to " << f.out_dir << '\n';
  return kExitOk;
}

std::string OneLine(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Multi-instance domain adaptation: train, predict, evaluate, synthesize"};
  app.name("mida");
  app.require_subcommand(1);

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Fit a model and write it with its residual trace");
  train->add_option("--reports", tf.reports, "Reports CSV")->required();
  train->add_option("--tweets", tf.tweets, "Tweets CSV")->required();
  train->add_option("--labels", tf.labels, "Labels CSV")->required();
  train->add_option("--out", tf.out, "Model JSON to write")->required();
  train->add_option("--trace", tf.trace, "Trace CSV (default: trace.csv beside --out)");
  train->add_option("--lambda1", tf.hyper.lambda1, "l1 weight")->capture_default_str();
  train->add_option("--lambda2", tf.hyper.lambda2, "MMD weight")->capture_default_str();
  train->add_option("--rho", tf.hyper.rho0, "Initial ADMM penalty")->capture_default_str();
  train->add_option("--partitions", tf.hyper.partitions, "MMD data-splitting chunks")->capture_default_str();
  train->add_option("--eta", tf.hyper.eta, "S-update FISTA step")->capture_default_str();
  train->add_option("--max-iter", tf.hyper.max_outer, "Outer ADMM iterations")->capture_default_str();
  train->add_option("--max-fista", tf.hyper.max_fista, "FISTA iteration cap")->capture_default_str();
  train->add_option("--max-ccp", tf.hyper.max_ccp, "CCP iteration cap")->capture_default_str();
  train->add_option("--tol-abs", tf.hyper.tol_abs, "Absolute residual tolerance")->capture_default_str();
  train->add_option("--tol-rel", tf.hyper.tol_rel, "Relative residual tolerance")->capture_default_str();
  train->add_flag("--adaptive-rho", tf.hyper.adaptive_rho, "Residual-balancing penalty updates");
  train->add_option("--seed", tf.hyper.seed, "Seed for partitioning and holdout")->capture_default_str();
  train->add_option("--threads", tf.threads, "Worker threads for the S-update")->capture_default_str();
  train->add_option("--holdout-fraction", tf.holdout_fraction,
                    "Fraction of users withheld from training")->capture_default_str();
  train->add_option("--holdout-labels", tf.holdout_labels,
                    "Where to write withheld labels (default: holdout_labels.csv beside --out)");
  train->add_flag("--no-prune", tf.no_prune, "Keep all-zero instances");

  PredictFlags pf;
  auto* predict = app.add_subcommand("predict", "Score users with a trained model");
  predict->add_option("--model", pf.model, "Model JSON")->required();
  predict->add_option("--tweets", pf.tweets, "Tweets CSV")->required();
  predict->add_option("--out", pf.out, "Scores CSV to write")->required();
  predict->add_flag("--no-prune", pf.no_prune, "Keep all-zero instances");

  EvaluateFlags ef;
  auto* evaluate = app.add_subcommand("evaluate", "Metrics, ROC and PR curves for scored users");
  evaluate->add_option("--scores", ef.scores, "Scores CSV (user_id,score)")->required();
  evaluate->add_option("--labels", ef.labels, "Labels CSV; only these users are evaluated")->required();
  evaluate->add_option("--out", ef.out, "Metrics JSON to write")->required();
  evaluate->add_option("--roc", ef.roc, "ROC points CSV (default: roc.csv beside --out)");
  evaluate->add_option("--pr", ef.pr, "PR points CSV (default: pr.csv beside --out)");
  evaluate->add_option("--threshold", ef.threshold, "Decision threshold")->capture_default_str();

  SynthFlags sf;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--out-dir", sf.out_dir, "Output directory")->required();
  synth->add_option("--users", sf.cfg.n_users)->capture_default_str();
  synth->add_option("--positive-fraction", sf.cfg.positive_fraction)->capture_default_str();
  synth->add_option("--tweets-min", sf.cfg.tweets_min)->capture_default_str();
  synth->add_option("--tweets-max", sf.cfg.tweets_max)->capture_default_str();
  synth->add_option("--keywords", sf.cfg.num_keywords)->capture_default_str();
  synth->add_option("--signal", sf.cfg.n_signal, "Number of signal keywords")->capture_default_str();
  synth->add_option("--reports", sf.cfg.n_reports)->capture_default_str();
  synth->add_option("--background-rate", sf.cfg.background_rate)->capture_default_str();
  synth->add_option("--signal-rate", sf.cfg.signal_rate)->capture_default_str();
  synth->add_option("--report-shift", sf.cfg.report_shift)->capture_default_str();
  synth->add_option("--seed", sf.cfg.seed)->capture_default_str();

  std::vector<std::string> argv_storage{"mida"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return Train(tf, out, err);
    if (*predict) return Predict(pf, out);
    if (*evaluate) return Evaluate(ef, out);
    if (*synth) return Synth(sf, out);
  } catch (const std::exception& e) {
    err << "error: " << OneLine(e.what()) << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace mida::cli
