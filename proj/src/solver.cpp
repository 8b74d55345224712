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

#include "mida/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

namespace mida::solver {
namespace {

constexpr double kScalarTol = 1e-8;     // S-update FISTA
constexpr int kWarmStartRounds = 10;
constexpr double kBetaFistaTol = 1e-8;  // beta-update FISTA, inf-norm
constexpr double kCcpTol = 1e-6;        // CCP, inf-norm between linearizations
constexpr double kCcpRiseTol = 1e-6;
constexpr int kCcpMaxRises = 3;
constexpr double kBetaBlowup = 1e8;

// Power iteration approaches the top eigenvalue from below; the margin keeps
// 1/L a valid FISTA step.
constexpr double kLipschitzMargin = 1.01;

// The printed recurrence starts at lam = 0, whose only role is to produce
// lam = 1; the first extrapolation then uses gamma = 0.
FistaState PrimedFista(double zeta0) {
  FistaState st;
  st.lam = fista_momentum(0.0).lam_next;
  st.zeta_prev = zeta0;
  return st;
}

struct BetaSubproblem {
  const StackedProblem* problem;
  double rho;
  double lambda1;
  double lambda2;
  Eigen::VectorXd xt_target;  // X^T (rho S + h)
  Eigen::VectorXd a4;         // 4 lambda2 A_j on entries 1..K, 0 on entry 0
  double lipschitz;

  Eigen::VectorXd Gradient(const Eigen::VectorXd& beta,
                           const Linearization& lin) const {
    Eigen::VectorXd g = rho * (problem->gram() * beta) - xt_target;
    g += a4.cwiseProduct(beta);
    g -= lin.gradient;
    return g;
  }
};

// (rho/2) |S - X beta + h/rho|^2 evaluated from the explicit residual.
double AugmentedTerm(const Eigen::VectorXd& beta, const AdmmState& state,
                     const StackedProblem& problem) {
  const Eigen::VectorXd resid =
      state.s - problem.x() * beta + state.h / state.rho;
  return 0.5 * state.rho * resid.squaredNorm();
}

double QuadraticMmd(const Eigen::VectorXd& beta, const Eigen::VectorXd& coef) {
  return (coef.array() * beta.tail(coef.size()).array().square()).sum();
}

// l(beta) - m~(beta), the convex surrogate minimised by one CCP step.
double SurrogateValue(const Eigen::VectorXd& beta, const AdmmState& state,
                      const StackedProblem& problem, const MmdWeights& w,
                      const Hyperparams& hyper, const Linearization& lin) {
  double v = hyper.lambda1 * beta.lpNorm<1>() +
             AugmentedTerm(beta, state, problem);
  if (!w.empty() && hyper.lambda2 != 0.0) {
    v += 2.0 * hyper.lambda2 * QuadraticMmd(beta, w.a);
  }
  return v - evaluate_linearization(lin, beta);
}

Eigen::VectorXd SolveConvexified(const BetaSubproblem& sub,
                                 const Eigen::VectorXd& start,
                                 const Linearization& lin, int max_iter,
                                 bool* capped) {
  const double eta = 1.0 / sub.lipschitz;
  FistaState st;
  st.lam = fista_momentum(0.0).lam_next;
  Eigen::VectorXd zeta_prev = start;
  Eigen::VectorXd cur = start;
  *capped = true;
  for (int it = 0; it < max_iter; ++it) {
    const MomentumStep m = fista_momentum(st.lam);
    const Eigen::VectorXd zeta =
        soft_threshold(cur - eta * sub.Gradient(cur, lin), sub.lambda1 * eta);
    Eigen::VectorXd next = (1.0 - m.gamma) * zeta + m.gamma * zeta_prev;
    const double change = (next - cur).lpNorm<Eigen::Infinity>();
    zeta_prev = zeta;
    st.lam = m.lam_next;
    cur = std::move(next);
    if (change < kBetaFistaTol) {
      *capped = false;
      break;
    }
  }
  return zeta_prev;
}

template <typename Fn>
void ParallelOverUsers(Eigen::Index num_users, int threads, Fn&& fn) {
  if (threads <= 1 || num_users < 2) {
    for (Eigen::Index u = 0; u < num_users; ++u) fn(u);
    return;
  }
  const auto workers = static_cast<Eigen::Index>(
      std::min<Eigen::Index>(threads, num_users));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Eigen::Index t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (Eigen::Index u = t; u < num_users; u += workers) fn(u);
    });
  }
  for (auto& th : pool) th.join();
}

std::vector<Eigen::Index> SelectRepresentatives(const StackedProblem& problem,
                                                const Coefficients& beta) {
  const Eigen::VectorXd scores = problem.x() * beta.beta;
  std::vector<Eigen::Index> rep(static_cast<std::size_t>(problem.num_users()));
  for (Eigen::Index u = 0; u < problem.num_users(); ++u) {
    rep[static_cast<std::size_t>(u)] = select_representative(
        scores.segment(problem.offset(u), problem.bag_size(u)));
  }
  return rep;
}

}  // namespace

StackedProblem::StackedProblem(const Dataset& data) : data_(&data) {
  const auto k = static_cast<Eigen::Index>(data.num_keywords());
  Eigen::Index total = 0;
  offsets_.reserve(data.bags.size() + 1);
  offsets_.push_back(0);
  for (const UserBag& bag : data.bags) {
    if (bag.counts.cols() != k) {
      throw DimensionError("user " + bag.user_id + " does not match the vocabulary width");
    }
    total += bag.size();
    offsets_.push_back(total);
  }
  x_.resize(total, k + 1);
  for (std::size_t u = 0; u < data.bags.size(); ++u) {
    const UserBag& bag = data.bags[u];
    x_.block(offsets_[u], 0, bag.size(), k + 1) = build_design_matrix(bag, data.num_keywords());
  }
  reports_ = data.reports.size() > 0 ? RealMatrix(data.reports.counts.cast<double>())
                                      : RealMatrix(0, k);
  gram_ = x_.transpose() * x_;
  gram_norm_ = power_iteration_norm(gram_);
}

int StackedProblem::label(Eigen::Index u) const {
  return data_->bags[static_cast<std::size_t>(u)].label;
}

double power_iteration_norm(const Eigen::MatrixXd& m, int steps) {
  if (m.rows() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows()).normalized();
  double estimate = 0.0;
  for (int i = 0; i < steps; ++i) {
    Eigen::VectorXd w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    estimate = v.dot(w);
    v = w / norm;
  }
  return std::max(estimate, v.dot(m * v));
}

AdmmState AdmmState::initial(const StackedProblem& problem,
                             const Coefficients& beta, double rho) {
  AdmmState st;
  st.offsets = problem.offsets();
  st.rho = rho;
  st.s = problem.x() * beta.beta;
  st.h = Eigen::VectorXd::Zero(st.s.size());
  st.rep_index = SelectRepresentatives(problem, beta);
  for (Eigen::Index u = 0; u < problem.num_users(); ++u) {
    const Eigen::Index e = problem.offset(u) + st.rep_index[static_cast<std::size_t>(u)];
    st.h(e) = -grad_p(st.s(e), problem.label(u));
  }
  return st;
}

int AdmmState::refresh_representatives(const StackedProblem& problem,
                                       const Coefficients& beta) {
  const Eigen::VectorXd scores = problem.x() * beta.beta;
  int moved = 0;
  for (Eigen::Index u = 0; u < problem.num_users(); ++u) {
    const Eigen::Index off = problem.offset(u);
    const Eigen::Index next =
        select_representative(scores.segment(off, problem.bag_size(u)));
    Eigen::Index& cur = rep_index[static_cast<std::size_t>(u)];
    if (next == cur) continue;
    const Eigen::Index a = off + cur;
    const Eigen::Index b = off + next;
    std::swap(h(a), h(b));
    const double offset_a = s(a) - scores(a);
    s(a) = scores(a) + (s(b) - scores(b));
    s(b) = scores(b) + offset_a;
    cur = next;
    ++moved;
  }
  return moved;
}

double soft_threshold(double alpha, double kappa) {
  return std::max(alpha - kappa, 0.0) - std::max(-alpha - kappa, 0.0);
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& alpha, double kappa) {
  return alpha.unaryExpr([kappa](double a) { return soft_threshold(a, kappa); });
}

MomentumStep fista_momentum(double lam) {
  const double next = (1.0 + std::sqrt(1.0 + 4.0 * lam * lam)) / 2.0;
  return {next, (1.0 - lam) / next};
}

double grad_p(double s, int y) {
  return logistic(s) - static_cast<double>(y);
}

double zeta_s(double s_k, double target, double rho, double eta, int y) {
  const double step = s_k - eta * grad_p(s_k, y);
  return (rho * target + step / eta) / (rho + 1.0 / eta);
}

ScalarSolve solve_representative(double start, double target, double rho,
                                 double eta, int y, int max_iter) {
  FistaState st = PrimedFista(start);
  double cur = start;
  for (int it = 0; it < max_iter; ++it) {
    const MomentumStep m = fista_momentum(st.lam);
    st.gamma = m.gamma;
    const double zeta = zeta_s(cur, target, rho, eta, y);
    const double next = (1.0 - st.gamma) * zeta + st.gamma * st.zeta_prev;
    const double change = std::abs(next - cur);
    st.zeta_prev = zeta;
    st.lam = m.lam_next;
    cur = next;
    if (change < kScalarTol) return {st.zeta_prev, it + 1, false};
  }
  return {st.zeta_prev, max_iter, true};
}

SUpdateStats s_update(AdmmState& state, const Coefficients& beta,
                      const StackedProblem& problem, const Hyperparams& hyper,
                      int threads) {
  const Eigen::VectorXd scores = problem.x() * beta.beta;
  const Eigen::Index users = problem.num_users();
  std::vector<int> iterations(static_cast<std::size_t>(users), 0);
  std::vector<char> capped(static_cast<std::size_t>(users), 0);

  ParallelOverUsers(users, threads, [&](Eigen::Index u) {
    const Eigen::Index off = problem.offset(u);
    const Eigen::Index rep = state.rep_index[static_cast<std::size_t>(u)];
    for (Eigen::Index i = 0; i < problem.bag_size(u); ++i) {
      const Eigen::Index e = off + i;
      const double target = scores(e) - state.h(e) / state.rho;
      if (i != rep) {
        state.s(e) = target;
      } else {
        const ScalarSolve sol =
            solve_representative(state.s(e), target, state.rho, hyper.eta,
                                 problem.label(u), hyper.max_fista);
        state.s(e) = sol.value;
        iterations[static_cast<std::size_t>(u)] = sol.iterations;
        capped[static_cast<std::size_t>(u)] = sol.capped;
      }
    }
  });

  SUpdateStats stats;
  for (Eigen::Index u = 0; u < users; ++u) {
    const auto seg = state.user_s(u);
    if (!seg.allFinite()) {
      throw DivergenceError("S-update produced a non-finite score for user " +
                            problem.data().bags[static_cast<std::size_t>(u)].user_id);
    }
    stats.capped += capped[static_cast<std::size_t>(u)];
    stats.max_iterations =
        std::max(stats.max_iterations, iterations[static_cast<std::size_t>(u)]);
  }
  return stats;
}

Linearization linearize_m(const Coefficients& beta_q, const MmdWeights& w,
                          double lambda2) {
  Linearization lin;
  lin.point = beta_q.beta;
  lin.gradient = Eigen::VectorXd::Zero(beta_q.size());
  if (w.empty() || lambda2 == 0.0) return lin;
  const auto weights = beta_q.beta.tail(w.b.size());
  lin.value = lambda2 * (w.b.array() * weights.array().square()).sum();
  lin.gradient.tail(w.b.size()) = 2.0 * lambda2 * w.b.cwiseProduct(weights);
  return lin;
}

double evaluate_linearization(const Linearization& lin,
                              const Eigen::VectorXd& beta) {
  return lin.value + lin.gradient.dot(beta - lin.point);
}

Eigen::VectorXd grad_s_beta(const Coefficients& beta, const AdmmState& state,
                            const StackedProblem& problem, const MmdWeights& w,
                            const Linearization& lin, double lambda2) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(beta.size());
  for (Eigen::Index u = 0; u < problem.num_users(); ++u) {
    const auto x_u = problem.x().middleRows(problem.offset(u), problem.bag_size(u));
    const Eigen::VectorXd resid =
        state.user_s(u) - x_u * beta.beta + state.user_h(u) / state.rho;
    g.noalias() -= state.rho * (x_u.transpose() * resid);
  }
  if (!w.empty() && lambda2 != 0.0) {
    g.tail(w.a.size()) +=
        4.0 * lambda2 * w.a.cwiseProduct(beta.beta.tail(w.a.size()));
  }
  g -= lin.gradient;
  return g;
}

double ccp_objective(const Coefficients& beta, const AdmmState& state,
                     const StackedProblem& problem, const MmdWeights& w,
                     const Hyperparams& hyper) {
  double v = hyper.lambda1 * beta.beta.lpNorm<1>() +
             AugmentedTerm(beta.beta, state, problem);
  if (!w.empty() && hyper.lambda2 != 0.0) {
    v += hyper.lambda2 * QuadraticMmd(beta.beta, 2.0 * w.a - w.b);
  }
  return v;
}

BetaUpdateResult beta_update(const AdmmState& state,
                             const StackedProblem& problem,
                             const MmdWeights& w, const Hyperparams& hyper,
                             const Coefficients& start) {
  const bool mmd_active = !w.empty() && hyper.lambda2 != 0.0;
  BetaSubproblem sub;
  sub.problem = &problem;
  sub.rho = state.rho;
  sub.lambda1 = hyper.lambda1;
  sub.lambda2 = hyper.lambda2;
  sub.xt_target = problem.x().transpose() * (state.rho * state.s + state.h);
  sub.a4 = Eigen::VectorXd::Zero(start.size());
  if (mmd_active) sub.a4.tail(w.a.size()) = 4.0 * hyper.lambda2 * w.a;
  sub.lipschitz = kLipschitzMargin * (state.rho * problem.gram_norm() +
                                      sub.a4.maxCoeff());
  if (!(sub.lipschitz > 0.0)) sub.lipschitz = 1.0;

  // m vanishes identically: one convex solve is the whole procedure.
  const bool concave_part = mmd_active && (w.b.array() > 0.0).any();

  BetaUpdateResult out;
  out.beta = start;
  out.ccp_values.push_back(ccp_objective(start, state, problem, w, hyper));
  int rises = 0;
  for (int q = 0; q < hyper.max_ccp; ++q) {
    const Linearization lin = linearize_m(out.beta, w, hyper.lambda2);
    bool capped = false;
    Eigen::VectorXd next =
        SolveConvexified(sub, out.beta.beta, lin, hyper.max_fista, &capped);
    out.capped = out.capped || capped;
    // FISTA is not monotone; never accept a point worse than the
    // linearization point on the surrogate.
    if (SurrogateValue(next, state, problem, w, hyper, lin) >
        SurrogateValue(out.beta.beta, state, problem, w, hyper, lin)) {
      next = out.beta.beta;
    }
    if (!next.allFinite() || next.lpNorm<Eigen::Infinity>() > kBetaBlowup) {
      throw DivergenceError(
          "beta-update diverged (|beta|_inf > 1e8); increase rho (rho >= 10 * "
          "lambda2 recommended)");
    }
    const double delta = (next - out.beta.beta).lpNorm<Eigen::Infinity>();
    out.beta.beta = std::move(next);
    ++out.ccp_iterations;
    const double value = ccp_objective(out.beta, state, problem, w, hyper);
    rises = value > out.ccp_values.back() + kCcpRiseTol ? rises + 1 : 0;
    out.ccp_values.push_back(value);
    if (rises >= kCcpMaxRises) {
      throw DivergenceError(
          "beta-update objective increased for 3 consecutive CCP steps; "
          "increase rho (rho >= 10 * lambda2 recommended)");
    }
    if (!concave_part || delta < kCcpTol) break;
    if (q + 1 == hyper.max_ccp) out.capped = true;
  }
  return out;
}

void dual_update(AdmmState& state, const Coefficients& beta,
                 const StackedProblem& problem) {
  state.h += state.rho * (state.s - problem.x() * beta.beta);
}

Residuals residuals(const AdmmState& state, const Coefficients& beta_prev,
                    const Coefficients& beta_new,
                    const StackedProblem& problem) {
  Residuals r;
  r.r_primal = (state.s - problem.x() * beta_new.beta).norm();
  r.s_dual = (state.rho * (problem.x() * (beta_prev.beta - beta_new.beta))).norm();
  return r;
}

double adaptive_rho(double rho, double r_primal, double s_dual) {
  if (r_primal > 10.0 * s_dual) return 2.0 * rho;
  if (s_dual > 10.0 * r_primal) return rho / 2.0;
  return rho;
}

namespace {

// l1 logistic regression on fixed rows by FISTA, started from `from`.
Eigen::VectorXd FitRows(const RealMatrix& rows, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& from, const Hyperparams& hyper) {
  const Eigen::MatrixXd gram = rows.transpose() * rows;
  const double lipschitz = kLipschitzMargin * 0.25 * power_iteration_norm(gram);
  if (!(lipschitz > 0.0)) return from;
  const double eta = 1.0 / lipschitz;

  FistaState st;
  st.lam = fista_momentum(0.0).lam_next;
  Eigen::VectorXd zeta_prev = from;
  Eigen::VectorXd cur = from;
  for (int it = 0; it < hyper.max_fista; ++it) {
    const MomentumStep m = fista_momentum(st.lam);
    const Eigen::VectorXd prob =
        (rows * cur).unaryExpr([](double s) { return logistic(s); });
    const Eigen::VectorXd grad = rows.transpose() * (prob - y);
    const Eigen::VectorXd zeta = soft_threshold(cur - eta * grad, hyper.lambda1 * eta);
    Eigen::VectorXd next = (1.0 - m.gamma) * zeta + m.gamma * zeta_prev;
    const double change = (next - cur).lpNorm<Eigen::Infinity>();
    zeta_prev = zeta;
    st.lam = m.lam_next;
    cur = std::move(next);
    if (change < kBetaFistaTol) break;
  }
  return zeta_prev;
}

// Max-rule loss plus l1 penalty, i.e. the objective with lambda2 = 0.
double MaxRuleObjective(const StackedProblem& problem, const Eigen::VectorXd& beta,
                        double lambda1) {
  const Eigen::VectorXd s = problem.x() * beta;
  double total = lambda1 * beta.lpNorm<1>();
  for (Eigen::Index u = 0; u < problem.num_users(); ++u) {
    total += representative_loss(s.segment(problem.offset(u), problem.bag_size(u)).maxCoeff(),
                                 problem.label(u));
  }
  return total;
}

}  // namespace

Coefficients warm_start(const StackedProblem& problem, const Hyperparams& hyper) {
  const Eigen::Index users = problem.num_users();
  const Eigen::Index p = problem.num_coefficients();
  Coefficients beta{Eigen::VectorXd::Zero(p)};
  if (users == 0) return beta;

  RealMatrix rows(users, p);
  Eigen::VectorXd y(users);
  for (Eigen::Index u = 0; u < users; ++u) {
    rows.row(u) = problem.x().middleRows(problem.offset(u), problem.bag_size(u)).colwise().mean();
    y(u) = problem.label(u);
  }
  // Mean collapsing dilutes a single adverse tweet, so on nearly separable
  // data the fit can be far worse under the max rule than zero.
  double best = MaxRuleObjective(problem, beta.beta, hyper.lambda1);
  Eigen::VectorXd cand = FitRows(rows, y, beta.beta, hyper);
  double value = MaxRuleObjective(problem, cand, hyper.lambda1);
  if (value < best) {
    best = value;
    beta.beta = cand;
  }

  // Refit on the current representatives while the max-rule objective drops.
  for (int round = 0; round < kWarmStartRounds; ++round) {
    const Eigen::VectorXd s = problem.x() * beta.beta;
    for (Eigen::Index u = 0; u < users; ++u) {
      const Eigen::Index i =
          select_representative(s.segment(problem.offset(u), problem.bag_size(u)));
      rows.row(u) = problem.x().row(problem.offset(u) + i);
    }
    cand = FitRows(rows, y, beta.beta, hyper);
    value = MaxRuleObjective(problem, cand, hyper.lambda1);
    if (!(value < best - 1e-12 * std::max(1.0, std::abs(best)))) break;
    best = value;
    beta.beta = cand;
  }
  return beta;
}

FitResult fit(const Dataset& data, const Hyperparams& hyper,
              const std::optional<Coefficients>& beta_init,
              const FitOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  hyper.validate();
  data.validate();
  const StackedProblem problem(data);

  FitResult result;
  SolveTrace& trace = result.trace;
  auto warn_if_unstable = [&](double rho) {
    if (auto msg = hyper.stability_warning(rho)) {
      if (std::find(trace.warnings.begin(), trace.warnings.end(), *msg) ==
          trace.warnings.end()) {
        trace.warnings.push_back(*msg);
      }
    }
  };

  Coefficients beta;
  if (beta_init) {
    if (beta_init->size() != problem.num_coefficients()) {
      throw DimensionError("initial beta has " + std::to_string(beta_init->size()) +
                           " entries, expected " +
                           std::to_string(problem.num_coefficients()));
    }
    beta = *beta_init;
  } else {
    beta = warm_start(problem, hyper);
  }

  const std::vector<std::size_t> positives = data.positive_users();
  const mmd::PartitionPlan plan =
      mmd::partition(static_cast<std::size_t>(problem.reports().rows()),
                     positives.size(), static_cast<std::size_t>(hyper.partitions),
                     hyper.seed);
  auto weights_for = [&](const std::vector<Eigen::Index>& rep) {
    if (hyper.lambda2 == 0.0) return MmdWeights::zeros(data.num_keywords());
    return mmd::compute_weights(problem.reports(),
                                mmd::representative_rows(data, rep), plan);
  };

  AdmmState state = AdmmState::initial(problem, beta, hyper.rho0);
  MmdWeights weights = weights_for(state.rep_index);
  const double sqrt_n = std::sqrt(static_cast<double>(problem.num_entries()));

  for (int k = 1; k <= hyper.max_outer; ++k) {
    state.k = k;
    // Representatives and MMD weights for the current beta were refreshed at
    // the end of the previous iteration (or by the initial state).
    if (k > 1) {
      if (hyper.adaptive_rho) {
        state.rho = adaptive_rho(state.rho, state.r_primal, state.s_dual);
      }
    }
    warn_if_unstable(state.rho);

    const SUpdateStats s_stats = s_update(state, beta, problem, hyper, options.threads);
    BetaUpdateResult bu;
    try {
      bu = beta_update(state, problem, weights, hyper, beta);
    } catch (const DivergenceError& e) {
      throw DivergenceError("outer iteration " + std::to_string(k) + ": " + e.what());
    }
    dual_update(state, bu.beta, problem);
    const Residuals res = residuals(state, beta, bu.beta, problem);
    state.r_primal = res.r_primal;
    state.s_dual = res.s_dual;
    beta = bu.beta;

    // Line 3 of the next iteration happens here so that the recorded
    // objective uses the representatives of the updated beta.
    if (state.refresh_representatives(problem, beta) > 0) {
      weights = weights_for(state.rep_index);
    }
    TraceRecord rec;
    rec.k = k;
    rec.r_primal = res.r_primal;
    rec.s_dual = res.s_dual;
    rec.rho = state.rho;
    try {
      rec.objective = full_objective(beta, data, weights, hyper);
    } catch (const DivergenceError& e) {
      throw DivergenceError("outer iteration " + std::to_string(k) + ": " + e.what());
    }
    rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    rec.ccp_values = std::move(bu.ccp_values);
    rec.inner_capped = bu.capped || s_stats.capped > 0;
    trace.records.push_back(std::move(rec));

    const double eps_pri =
        sqrt_n * hyper.tol_abs +
        hyper.tol_rel * std::max(state.s.norm(), (problem.x() * beta.beta).norm());
    const double eps_dual = sqrt_n * hyper.tol_abs + hyper.tol_rel * state.h.norm();
    if (res.r_primal < eps_pri && res.s_dual < eps_dual) {
      trace.converged = true;
      break;
    }
  }

  Model& model = result.model;
  model.vocabulary = data.vocabulary;
  model.beta = beta;
  model.hyper = hyper;
  if (!trace.records.empty()) {
    const TraceRecord& last = trace.records.back();
    model.summary = {last.k, trace.converged, last.r_primal, last.s_dual,
                     last.rho, last.objective};
  }
  return result;
}

double predict(const Model& model, const UserBag& bag) {
  if (bag.counts.cols() != static_cast<Eigen::Index>(model.vocabulary.size())) {
    throw DimensionError("user " + bag.user_id + " has " +
                         std::to_string(bag.counts.cols()) +
                         " keyword columns, model vocabulary has " +
                         std::to_string(model.vocabulary.size()));
  }
  return user_probability(model.beta, bag);
}

}  // namespace mida::solver
