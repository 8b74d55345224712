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


// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mida/cli.hpp"
#include "mida/metrics.hpp"
#include "mida/mmd.hpp"
#include "mida/solver.hpp"
#include "mida/synth.hpp"
#include "oracles.hpp"
#include "solver_fixtures.hpp"

using namespace mida;
using namespace mida::solver;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

// Every CCP value sequence produced by fits in this suite.
std::vector<std::vector<double>> g_ccp_sequences;

void Record(const SolveTrace& trace) {
  for (const TraceRecord& r : trace.records) g_ccp_sequences.push_back(r.ccp_values);
}

std::string Fmt(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c);
  return buf;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Trace CSV without its wall-clock column.
std::string WithoutSeconds(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

int Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

Verdict ProxOracle() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> alpha(-5.0, 5.0), kappa(0.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double a = alpha(rng), k = kappa(rng);
    const double ref = oracle::grid_argmin(
        [&](double x) { return k * std::abs(x) + 0.5 * (x - a) * (x - a); },
        std::min(0.0, a) - 0.1, std::max(0.0, a) + 0.1, 1e-4);
    worst = std::max(worst, std::abs(soft_threshold(a, k) - ref));
  }
  return {worst < 2e-4, Fmt("max |prox - grid| = %.2e over 1000 cases", worst)};
}

Verdict GradientOracles() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-8.0, 8.0);
  double worst_p = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double s = d(rng);
    const int y = i % 2;
    const double h = 1e-6;
    const double fd = (oracle::naive_log_loss(s + h, y) - oracle::naive_log_loss(s - h, y)) / (2 * h);
    worst_p = std::max(worst_p, std::abs(grad_p(s, y) - fd) / std::max(std::abs(fd), 1e-3));
  }
  double worst_b = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset data = oracle::random_dataset(100 + trial, 5, 4, 3, 0);
    const StackedProblem problem(data);
    std::mt19937_64 r(100 + trial);
    const AdmmState st = solver_fixture::RandomState(r, problem, 1.5);
    const MmdWeights w = solver_fixture::RandomWeights(r, 4);
    const Coefficients bq{oracle::random_vector(r, 5, 1.0)};
    const Coefficients beta{oracle::random_vector(r, 5, 1.0)};
    const Linearization lin = linearize_m(bq, w, 0.9);
    const Eigen::VectorXd g = grad_s_beta(beta, st, problem, w, lin, 0.9);
    const oracle::Vec fd = oracle::central_difference(
        [&](const oracle::Vec& b) { return solver_fixture::SmoothPart(b, st, problem, w, lin, 0.9); },
        oracle::to_vec(beta.beta), 1e-6);
    for (std::size_t j = 0; j < fd.size(); ++j) {
      worst_b = std::max(worst_b, std::abs(g(j) - fd[j]) / std::max(1.0, std::abs(fd[j])));
    }
  }
  return {worst_p < 1e-5 && worst_b < 1e-5,
          Fmt("max relative error: grad_p %.2e, grad_s_beta %.2e", worst_p, worst_b)};
}

Verdict SUpdateOracle() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> rho_d(0.1, 10.0), target_d(-10.0, 10.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double rho = rho_d(rng), target = target_d(rng);
    const int y = trial % 2;
    const ScalarSolve sol = solve_representative(target, target, rho, 1.0, y, 5000);
    const double grid = oracle::grid_argmin(
        [&](double s) { return solver_fixture::ScalarObjective(s, target, rho, y); }, -20.0, 20.0, 1e-4);
    worst = std::max(worst, std::abs(sol.value - grid));
  }

  // Non-representative entries, unscaled dual: rho (S - X beta) + h = 0.
  const Dataset data = oracle::random_dataset(7, 30, 5, 5, 0);
  const StackedProblem problem(data);
  std::mt19937_64 r(7);
  const Coefficients beta{oracle::random_vector(r, 6, 0.5)};
  AdmmState st = solver_fixture::RandomState(r, problem, 3.0);
  st.rep_index.clear();
  for (Eigen::Index u = 0; u < problem.num_users(); ++u) {
    st.rep_index.push_back(select_representative(bag_scores(data.bags[static_cast<std::size_t>(u)], beta)));
  }
  const Eigen::VectorXd h = st.h;
  s_update(st, beta, problem, Hyperparams{});
  const Eigen::VectorXd xb = problem.x() * beta.beta;
  double stationarity = 0.0;
  for (Eigen::Index u = 0; u < problem.num_users(); ++u) {
    for (Eigen::Index i = 0; i < problem.bag_size(u); ++i) {
      if (i == st.rep_index[static_cast<std::size_t>(u)]) continue;
      const Eigen::Index e = problem.offset(u) + i;
      stationarity = std::max(stationarity, std::abs(st.rho * (st.s(e) - xb(e)) + h(e)) /
                                                std::max(1.0, std::abs(h(e))));
    }
  }
  return {worst < 1e-3 && stationarity < 1e-12,
          Fmt("max |S - grid| = %.2e; non-representative stationarity %.1e (rounding only)", worst,
              stationarity)};
}

Verdict MmdOracle() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 50), width(1, 20);
  std::poisson_distribution<int> count(1.5);
  auto rows = [&](int n, int k) {
    RealMatrix m(n, k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) m(i, j) = count(rng);
    return m;
  };
  double worst = 0.0, worst_within = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = width(rng);
    const RealMatrix reports = rows(size(rng), k);
    const RealMatrix selected = rows(size(rng), k);
    const Coefficients beta{oracle::random_vector(rng, k + 1, 2.0)};
    const mmd::PartitionPlan whole =
        mmd::partition(static_cast<std::size_t>(reports.rows()), static_cast<std::size_t>(selected.rows()), 1, 0);
    const double ref = oracle::pairwise_mmd(oracle::to_rows(reports), oracle::to_rows(selected),
                                            oracle::to_vec(beta.beta));
    const double got = mmd::mmd_distance(beta, mmd::compute_weights(reports, selected, whole));
    worst = std::max(worst, std::abs(got - ref) / std::max(1.0, std::abs(ref)));
    const Eigen::VectorXd b = mmd::within_domain_weights(selected, whole);
    const oracle::Vec bref = oracle::pairwise_within(oracle::to_rows(selected));
    for (int j = 0; j < k; ++j) worst_within = std::max(worst_within, std::abs(b(j) - bref[j]));
  }
  return {worst < 1e-10 && worst_within < 1e-10,
          Fmt("distance vs pairwise %.1e, within-domain identity %.1e", worst, worst_within)};
}

// Graded at lambda1 = 1. At the default 0.01 the larger fixtures are nearly
// separable and the first-order oracle stalls, so the default is reported
// only on the two smallest.
Verdict Reduction() {
  double worst = 0.0, worst_default = 0.0, worst_cold = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const int users = 80 + 30 * static_cast<int>(seed);
    const int k = 10 + 10 * static_cast<int>(seed);
    const Dataset data = oracle::random_dataset(500 + seed, users, k, 1, 0);
    oracle::Mat x;
    std::vector<int> y;
    for (const UserBag& bag : data.bags) {
      x.push_back(oracle::to_rows(bag.counts)[0]);
      y.push_back(bag.label);
    }
    auto gap = [&](const Hyperparams& hyper, const std::optional<Coefficients>& start) {
      const FitResult res = fit(data, hyper, start);
      Record(res.trace);
      const oracle::LogisticOracle ref = oracle::l1_logistic(x, y, hyper.lambda1);
      return std::abs(res.trace.records.back().objective - ref.objective);
    };
    Hyperparams hyper;
    hyper.lambda1 = 1.0;
    hyper.lambda2 = 0.0;
    worst = std::max(worst, gap(hyper, std::nullopt));

    // The ADMM iterations alone, from zero.
    Hyperparams cold = hyper;
    cold.max_outer = 2000;
    cold.rho0 = 0.5;
    worst_cold = std::max(worst_cold, gap(cold, Coefficients::zeros(static_cast<std::size_t>(k))));

    if (seed < 2) {
      Hyperparams defaults;
      defaults.lambda2 = 0.0;
      worst_default = std::max(worst_default, gap(defaults, std::nullopt));
    }
  }
  return {worst < 1e-6,
          Fmt("max |objective - oracle| = %.2e; informational: %.2e at the default lambda1, "
              "%.2e from zero",
              worst, worst_default, worst_cold)};
}

Verdict AdmmBehaviour() {
  synth::SynthConfig cfg;  // 1,000 users, 50 keywords, 10 signal, 2,000 reports
  const Dataset data = synth::generate(cfg).dataset;
  const FitResult res = fit(data, Hyperparams{});
  Record(res.trace);
  const auto& rec = res.trace.records;
  if (rec.size() < 20) return {false, "stopped after " + std::to_string(rec.size()) + " iterations"};
  const double r1 = rec[0].r_primal, r20 = rec[19].r_primal;
  return {r20 < r1 && r20 < 1e-3, Fmt("r_1 = %.3e, r_20 = %.3e, s_20 = %.3e", r1, r20, rec[19].s_dual)};
}

struct EndToEnd {
  fs::path root;
  double auc_mmd = 0.0;
  double auc_plain = 0.0;
};

double TrainAndScore(const fs::path& root, const std::string& tag, const std::string& lambda2,
                     const std::string& seed) {
  const fs::path dir = root / tag;
  const fs::path data = root / "data";
  if (Cli({"train", "--reports", (data / "reports.csv").string(), "--tweets",
           (data / "tweets.csv").string(), "--labels", (data / "labels.csv").string(), "--out",
           (dir / "model.json").string(), "--lambda2", lambda2, "--holdout-fraction", "0.3",
           "--seed", seed}) != 0)
    return -1.0;
  if (Cli({"predict", "--model", (dir / "model.json").string(), "--tweets",
           (data / "tweets.csv").string(), "--out", (dir / "scores.csv").string()}) != 0)
    return -1.0;
  if (Cli({"evaluate", "--scores", (dir / "scores.csv").string(), "--labels",
           (dir / "holdout_labels.csv").string(), "--out", (dir / "metrics.json").string()}) != 0)
    return -1.0;
  return nlohmann::json::parse(Slurp(dir / "metrics.json"))["auc"].get<double>();
}

Verdict EndToEndLearning(EndToEnd& e2e) {
  if (Cli({"synth", "--out-dir", (e2e.root / "data").string(), "--seed", "17"}) != 0) {
    return {false, "synth failed"};
  }
  e2e.auc_mmd = TrainAndScore(e2e.root, "mmd", "1", "17");
  e2e.auc_plain = TrainAndScore(e2e.root, "plain", "0", "17");
  return {e2e.auc_mmd >= 0.90 && e2e.auc_mmd >= e2e.auc_plain - 0.01,
          Fmt("held-out AUC %.4f with lambda2 = 1, %.4f with lambda2 = 0", e2e.auc_mmd, e2e.auc_plain)};
}

Verdict FScoreConsistency() {
  const double direct = metrics::harmonic_mean(0.7735, 0.5333);
  // 7735 true positives, 2265 false positives, 6769 false negatives:
  // precision 0.7735 and recall 0.53330 at threshold 0.5.
  std::vector<metrics::ScoredLabel> v;
  v.insert(v.end(), 7735, {0.9, 1});
  v.insert(v.end(), 2265, {0.9, 0});
  v.insert(v.end(), 6769, {0.1, 1});
  v.insert(v.end(), 5000, {0.1, 0});
  const metrics::ThresholdMetrics m = metrics::threshold_metrics(v, 0.5);
  const bool ok = std::abs(direct - 0.6310) <= 0.0005 && std::abs(m.fs - 0.6310) <= 0.0005 &&
                  std::abs(m.pr - 0.7735) < 1e-12 && std::abs(m.re - 0.5333) < 5e-5;
  return {ok, Fmt("FS = %.4f from (0.7735, 0.5333); %.4f from counts", direct, m.fs)};
}

Verdict MetricsOracle() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> size(2, 500);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(rng);
    std::vector<metrics::ScoredLabel> v;
    oracle::Vec scores;
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
      const double s = trial % 2 ? u(rng) : std::floor(u(rng) * 10.0) / 10.0;
      const int y = i == 0 ? 1 : i == 1 ? 0 : (u(rng) < 0.3 + 0.4 * s ? 1 : 0);
      v.push_back({s, y});
      scores.push_back(s);
      labels.push_back(y);
    }
    worst = std::max(worst, std::abs(metrics::roc_auc(v).area - oracle::mann_whitney(scores, labels)));
  }
  return {worst < 1e-10, Fmt("max |trapezoid - Mann-Whitney| = %.1e over 100 sets", worst)};
}

Verdict Determinism(const EndToEnd& e2e) {
  // Rerun the lambda2 = 1 training with the same seed and compare outputs.
  TrainAndScore(e2e.root, "mmd_again", "1", "17");
  const bool models = Slurp(e2e.root / "mmd" / "model.json") == Slurp(e2e.root / "mmd_again" / "model.json");
  const bool traces = WithoutSeconds(Slurp(e2e.root / "mmd" / "trace.csv")) ==
                      WithoutSeconds(Slurp(e2e.root / "mmd_again" / "trace.csv"));
  const bool scores = Slurp(e2e.root / "mmd" / "scores.csv") == Slurp(e2e.root / "mmd_again" / "scores.csv");
  std::string detail = std::string("model files ") + (models ? "identical" : "DIFFER") +
                       ", traces " + (traces ? "identical" : "DIFFER") +
                       " (seconds column excluded), scores " + (scores ? "identical" : "DIFFER");
  return {models && traces && scores && !Slurp(e2e.root / "mmd" / "model.json").empty(), detail};
}

Verdict CcpDescent() {
  std::size_t steps = 0, violations = 0;
  double worst = 0.0;
  for (const auto& seq : g_ccp_sequences) {
    for (std::size_t i = 1; i < seq.size(); ++i) {
      ++steps;
      const double rise = seq[i] - seq[i - 1];
      worst = std::max(worst, rise);
      if (rise > 1e-8) ++violations;
    }
  }
  return {violations == 0 && steps > 0,
          "checked " + std::to_string(steps) + " CCP steps in " + std::to_string(g_ccp_sequences.size()) +
              " beta-updates; largest rise " + Fmt("%.1e", worst)};
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / ("mida_acceptance_" + std::to_string(::getpid()));
  EndToEnd e2e{root};

  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Verdict()> run;
  };
  // CCP descent is audited last, over every fit the other criteria ran.
  const std::vector<Criterion> criteria = {
      {1, "prox oracle", 1.0, ProxOracle},
      {2, "gradient oracles", 5.0, GradientOracles},
      {3, "S-update oracle", 10.0, SUpdateOracle},
      {4, "MMD oracle", 5.0, MmdOracle},
      {5, "reduction to l1 logistic regression", 30.0, Reduction},
      {7, "ADMM residual decline", 60.0, AdmmBehaviour},
      {8, "end-to-end learning", 120.0, [&] { return EndToEndLearning(e2e); }},
      {9, "F-score consistency", 1.0, FScoreConsistency},
      {10, "trapezoid AUC oracle", 5.0, MetricsOracle},
      {11, "determinism", 120.0, [&] { return Determinism(e2e); }},
      {6, "CCP descent", 1.0, CcpDescent},
  };

  std::vector<std::string> lines(12);
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& ex) {
      v = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = v.pass && in_time;
    failures += pass ? 0 : 1;
    char head[128];
    std::snprintf(head, sizeof(head), "%s %2d %s (%.2f s, limit %.0f s): ", pass ? "PASS" : "FAIL", c.id,
                  c.name, secs, c.limit_seconds);
    lines[static_cast<std::size_t>(c.id)] =
        head + v.detail + (in_time ? "" : "; over the time limit");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) std::cout << lines[i] << '\n';
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
  fs::remove_all(root);
  return failures == 0 ? 0 : 1;
}
