#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "censreg/objective.hpp"
#include "censreg/types.hpp"

namespace censreg {

struct FitOptions {
  int max_iter = 200;
  double grad_tol = 1e-8;    // sup norm of the average score
  double step_tol = 1e-12;   // sup norm of the accepted parameter step
  double gamma_floor = 1e-10;
  // Starting point. When absent, an OLS-based start is built from the data
  // (uncensored rows only for the Tobit model); for the truncated model,
  // whose objective need not be concave, 4 additional starts perturbed by
  // +-20% (deterministic, from multistart_seed) are tried and the best final
  // objective wins.
  std::optional<ReparamPoint> init;
  int extra_starts = 4;
  double perturb_scale = 0.2;
  std::uint64_t multistart_seed = 0x7c5f3a1e9d24b80fULL;
  Exec exec = Exec::automatic;
};

// (beta, sigma^2) recovered from the working coordinates, with the
// delta-method covariance when one was available (size 0 otherwise).
struct OrigParams {
  Eigen::VectorXd beta;
  double sigma2 = 0.0;
  Eigen::MatrixXd cov;
};

struct FitResult {
  ReparamPoint theta_hat;
  double loglik = 0.0;  // average per-observation log likelihood at theta_hat
  int n_iter = 0;
  bool converged = false;
  Eigen::VectorXd avg_score;
  double avg_score_norm = 0.0;
  Eigen::MatrixXd avg_hessian;
  Eigen::MatrixXd avg_opg;
  double min_eig_neg_avg_hessian = 0.0;
  // Asymptotic variance estimates for sqrt(n)*(theta_hat - theta0); empty
  // when the corresponding matrix failed the singularity guard.
  Eigen::MatrixXd avar_hessian;
  Eigen::MatrixXd avar_opg;
  Eigen::Index n = 0;
  // Objective after each accepted ascent step, starting value first.
  // Monotone nondecreasing by construction (the line search only accepts
  // ascent). Final score-contraction steps, taken once objective differences
  // fall below rounding, are not recorded here, so loglik can differ from
  // trace.back() at rounding level.
  std::vector<double> trace;
  OrigParams orig;
};

// One damped Newton step. Direction is (-avg_hessian)^{-1} score when that
// solve yields an ascent direction, otherwise the raw score (steepest
// ascent). Step length starts at 1, is capped so gamma stays above
// gamma_floor (never lands on it), and halves until the objective strictly
// increases. stalled is set when the step length underflows step_tol before
// any increase is found.
struct StepResult {
  ReparamPoint next;
  double objective = 0.0;
  double step_scale = 0.0;
  bool used_gradient = false;
  bool stalled = false;
};

StepResult newton_step(const ReparamPoint& cur, double cur_objective,
                       const Eigen::VectorXd& avg_score,
                       const Eigen::MatrixXd& avg_hessian,
                       const std::function<double(const ReparamPoint&)>& objective,
                       const FitOptions& opts);

// Inverse of -avg_hessian (or of avg_opg), guarded: the smallest eigenvalue
// must be positive and clear a relative threshold, otherwise
// NonsingularityError carrying that eigenvalue is thrown.
Eigen::MatrixXd avar_from_hessian(const Eigen::MatrixXd& avg_hessian);
Eigen::MatrixXd avar_from_opg(const Eigen::MatrixXd& avg_opg);

// Jacobian of (beta, sigma^2) with respect to (delta, gamma):
//   d beta_i / d delta_j = 1{i=j}/gamma,  d beta_i / d gamma = -delta_i/gamma^2,
//   d sigma^2 / d delta = 0,              d sigma^2 / d gamma = -2/gamma^3.
Eigen::MatrixXd reparam_jacobian(const ReparamPoint& p);

// Map a point and the covariance of its estimator to original coordinates:
// cov_out = J cov_theta J'. Pass the covariance of theta_hat itself
// (avar / n), not the avar of the sqrt(n) rescaling.
OrigParams delta_method(const ReparamPoint& p, const Eigen::MatrixXd& cov_theta);

FitResult fit(const Dataset& data, const FitOptions& opts = {});

}  // namespace censreg
