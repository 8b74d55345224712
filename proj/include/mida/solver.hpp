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

// ADMM solver for the multi-instance domain adaptation objective
//
//   min_beta  sum_u Loss_u(beta) + lambda1 |beta|_1 + lambda2 Dist^2(beta).
//
// The per-instance scores are split off into an auxiliary variable S with the
// constraint S_{u,i} = X_{u,i} beta. Each outer iteration
//   1. re-selects the representative instance of every bag and the MMD
//      weights that depend on it,
//   2. updates S (closed form for non-representatives, scalar FISTA for the
//      representative of each bag),
//   3. updates beta by a convex-concave procedure whose convexified
//      subproblems are solved by FISTA with soft thresholding,
//   4. takes a dual ascent step and records the residuals.
//
// The dual variable h is kept unscaled: the augmented term is
// (rho/2) |S - X beta + h / rho|^2 and the dual step is h += rho (S - X beta).

#ifndef MIDA_SOLVER_HPP_
#define MIDA_SOLVER_HPP_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mida/core_model.hpp"
#include "mida/mmd.hpp"

namespace mida::solver {

// Every instance of every bag stacked into one design matrix, plus the
// quantities the solver reuses across iterations.
class StackedProblem {
 public:
  explicit StackedProblem(const Dataset& data);

  const Dataset& data() const { return *data_; }
  const RealMatrix& x() const { return x_; }
  const RealMatrix& reports() const { return reports_; }
  // X^T X and a power-iteration estimate of its largest eigenvalue.
  const Eigen::MatrixXd& gram() const { return gram_; }
  double gram_norm() const { return gram_norm_; }

  Eigen::Index num_users() const {
    return static_cast<Eigen::Index>(offsets_.size()) - 1;
  }
  Eigen::Index num_entries() const { return x_.rows(); }
  Eigen::Index num_coefficients() const { return x_.cols(); }
  Eigen::Index offset(Eigen::Index u) const { return offsets_[u]; }
  Eigen::Index bag_size(Eigen::Index u) const {
    return offsets_[u + 1] - offsets_[u];
  }
  const std::vector<Eigen::Index>& offsets() const { return offsets_; }
  int label(Eigen::Index u) const;

 private:
  const Dataset* data_;
  RealMatrix x_;
  RealMatrix reports_;
  Eigen::MatrixXd gram_;
  double gram_norm_ = 0.0;
  std::vector<Eigen::Index> offsets_;
};

// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double power_iteration_norm(const Eigen::MatrixXd& m, int steps = 50);

struct AdmmState {
  // S and h share the stacked layout: entries offsets[u] .. offsets[u+1]-1
  // belong to bag u.
  Eigen::VectorXd s;
  Eigen::VectorXd h;
  std::vector<Eigen::Index> offsets;
  double rho = 1.0;
  std::vector<Eigen::Index> rep_index;  // I(u), local to each bag
  int k = 0;
  double r_primal = 0.0;
  double s_dual = 0.0;

  // S = X beta, representatives from beta, and h chosen so that beta's
  // stacked scores are a fixed point of the S-update.
  static AdmmState initial(const StackedProblem& problem,
                           const Coefficients& beta, double rho);

  // Re-selects I(u) from beta. When a bag's representative moves, the dual
  // and the score offset S - X beta of the old representative move with it,
  // so the loss multiplier follows the instance that carries the loss.
  // Returns the number of bags whose representative changed.
  int refresh_representatives(const StackedProblem& problem,
                              const Coefficients& beta);

  auto user_s(Eigen::Index u) { return s.segment(offsets[u], offsets[u + 1] - offsets[u]); }
  auto user_s(Eigen::Index u) const { return s.segment(offsets[u], offsets[u + 1] - offsets[u]); }
  auto user_h(Eigen::Index u) { return h.segment(offsets[u], offsets[u + 1] - offsets[u]); }
  auto user_h(Eigen::Index u) const { return h.segment(offsets[u], offsets[u + 1] - offsets[u]); }
};

struct FistaState {
  double lam = 0.0;
  double gamma = 0.0;
  double zeta_prev = 0.0;
};

struct MomentumStep {
  double lam_next;
  double gamma;
};

// eps_kappa(alpha) = max(alpha - kappa, 0) - max(-alpha - kappa, 0).
double soft_threshold(double alpha, double kappa);
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& alpha, double kappa);

// lam_next = (1 + sqrt(1 + 4 lam^2)) / 2, gamma = (1 - lam) / lam_next.
MomentumStep fista_momentum(double lam);

// d/ds [log(1 + e^s) - y s] = sigma(s) - y.
double grad_p(double s, int y);

// Closed-form minimiser of
//   (rho/2)(z - target)^2 + (1/(2 eta)) (z - (s_k - eta grad_p(s_k)))^2.
double zeta_s(double s_k, double target, double rho, double eta, int y);

struct ScalarSolve {
  double value;
  int iterations;
  bool capped;
};

// FISTA on F(S) + (rho/2)(S - target)^2 for one representative score,
// started at `start`. Stops when an iterate moves by less than 1e-8.
ScalarSolve solve_representative(double start, double target, double rho,
                                 double eta, int y, int max_iter);

struct SUpdateStats {
  int capped = 0;        // representatives that hit max_fista
  int max_iterations = 0;
};

// Non-representatives: S = X beta - h / rho. Representatives: scalar FISTA.
// Bags are independent; `threads` > 1 spreads them over worker threads
// without changing the result.
SUpdateStats s_update(AdmmState& state, const Coefficients& beta,
                      const StackedProblem& problem, const Hyperparams& hyper,
                      int threads = 1);

// Tangent of m(beta) = lambda2 sum_j B_j beta_{j+1}^2 at beta_q.
struct Linearization {
  Eigen::VectorXd point;
  double value = 0.0;
  Eigen::VectorXd gradient;  // entry 0 (intercept) is always 0
};
Linearization linearize_m(const Coefficients& beta_q, const MmdWeights& w,
                          double lambda2);
// m~(beta) = m(beta_q) + grad m(beta_q) . (beta - beta_q).
double evaluate_linearization(const Linearization& lin,
                              const Eigen::VectorXd& beta);

// Gradient of the smooth part of the convexified beta subproblem,
//   s(beta) = (rho/2)|S - X beta + h/rho|^2 + 2 lambda2 sum_j A_j beta_{j+1}^2
//             - m~(beta).
// Evaluated bag by bag from the stacked design.
Eigen::VectorXd grad_s_beta(const Coefficients& beta, const AdmmState& state,
                            const StackedProblem& problem, const MmdWeights& w,
                            const Linearization& lin, double lambda2);

// l(beta) - m(beta): the nonconvex beta-subproblem objective.
double ccp_objective(const Coefficients& beta, const AdmmState& state,
                     const StackedProblem& problem, const MmdWeights& w,
                     const Hyperparams& hyper);

struct BetaUpdateResult {
  Coefficients beta;
  std::vector<double> ccp_values;  // l - m at beta^0, beta^1, ...
  int ccp_iterations = 0;
  bool capped = false;  // an inner FISTA or the CCP loop hit its cap
};

// Convex-concave procedure started at `start`; each convexified subproblem is
// solved by FISTA with step 1/L. Throws DivergenceError when the iterates run
// away.
BetaUpdateResult beta_update(const AdmmState& state,
                             const StackedProblem& problem,
                             const MmdWeights& w, const Hyperparams& hyper,
                             const Coefficients& start);

// h += rho (S - X beta).
void dual_update(AdmmState& state, const Coefficients& beta,
                 const StackedProblem& problem);

struct Residuals {
  double r_primal;
  double s_dual;
};
// r = |S - X beta_new|, s = |rho X (beta_prev - beta_new)|.
Residuals residuals(const AdmmState& state, const Coefficients& beta_prev,
                    const Coefficients& beta_new,
                    const StackedProblem& problem);

// Residual balancing: double rho when r > 10 s, halve it when s > 10 r.
double adaptive_rho(double rho, double r_primal, double s_dual);

struct TraceRecord {
  int k = 0;
  double r_primal = 0.0;
  double s_dual = 0.0;
  double rho = 0.0;
  double objective = 0.0;
  double seconds = 0.0;  // wall time since fit started
  std::vector<double> ccp_values;
  bool inner_capped = false;
};

struct SolveTrace {
  std::vector<TraceRecord> records;
  std::vector<std::string> warnings;
  bool converged = false;
};

struct TraceSummary {
  int iterations = 0;
  bool converged = false;
  double r_primal = 0.0;
  double s_dual = 0.0;
  double rho = 0.0;
  double objective = 0.0;
};

struct Model {
  KeywordVocabulary vocabulary;
  Coefficients beta;
  Hyperparams hyper;
  TraceSummary summary;
};

struct FitOptions {
  int threads = 1;
};

struct FitResult {
  Model model;
  SolveTrace trace;
};

// lambda2 = 0 starting point for fit: the better of zero and an l1 logistic
// fit on bag means, then refits on representative instances while the
// max-rule objective keeps falling.
Coefficients warm_start(const StackedProblem& problem, const Hyperparams& hyper);

FitResult fit(const Dataset& data, const Hyperparams& hyper,
              const std::optional<Coefficients>& beta_init = std::nullopt,
              const FitOptions& options = {});

double predict(const Model& model, const UserBag& bag);

}  // namespace mida::solver

#endif  // MIDA_SOLVER_HPP_
