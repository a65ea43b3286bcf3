#pragma once

#include <Eigen/Dense>
#include <optional>

#include "censreg/estimator.hpp"
#include "censreg/simulate.hpp"
#include "censreg/types.hpp"

namespace censreg {

// Kolmogorov-Smirnov statistic of a sample against the standard normal CDF.
double ks_statistic_std_normal(Eigen::VectorXd sample);

// Asymptotic two-sided KS p-value with the small-sample scale correction
// lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) * d.
double ks_pvalue(double d, Eigen::Index n);

// Closed-form conditional moments vs the quadrature oracle, orders 1-4.
// Returns the worst relative error across the grid. The oracle integrates the
// normalized integrand z^i exp(-z^2/2 - log sqrt(2pi) - logS(v)); for odd i
// at v < 0 the symmetric part of z^i phi(z) cancels exactly, so only the
// (positive) tail beyond |v| is integrated. That keeps the comparison
// relatively accurate even where the moment itself is ~1e-15.
double check_moment_identity(const Eigen::VectorXd& v_grid);

// Monte Carlo mean of the per-observation score at theta_eval over one fresh
// sample of n_mc observations drawn at the config's truth, each component
// divided by its MC standard error. theta_eval defaults to the truth;
// negative controls pass a deliberately wrong point.
Eigen::VectorXd check_score_mean(ModelKind kind, const DgpConfig& cfg,
                                 Eigen::Index n_mc,
                                 const std::optional<ReparamPoint>& theta_eval = {});

struct InfoEqResult {
  Eigen::MatrixXd avg_opg;       // MC average of s s'
  Eigen::MatrixXd avg_hessian;   // MC average of H
  Eigen::MatrixXd diff;          // avg_opg + avg_hessian (0 at the truth)
  Eigen::MatrixXd se;            // MC standard error of each diff entry
  double rel_frobenius = 0.0;    // ||diff||_F / ||avg_opg||_F
  double max_abs_z = 0.0;        // max |diff| / se entrywise
};

InfoEqResult check_information_equality(
    ModelKind kind, const DgpConfig& cfg, Eigen::Index n_mc,
    const std::optional<ReparamPoint>& theta_eval = {});

// Replicated-fit study of the estimator's sampling distribution. Each
// replication draws a fresh dataset (stream = seed xor replication index),
// fits it, and standardizes theta_hat by its own estimated standard errors.
struct McReport {
  Eigen::Index n_reps = 0;      // requested
  Eigen::Index n_used = 0;      // converged fits with usable variance
  Eigen::Index n_failures = 0;
  bool flagged = false;         // failures exceed 2% of requests
  Eigen::MatrixXd estimates;      // n_used x (K+1), packed (delta, gamma)
  Eigen::MatrixXd standardized;   // (theta_hat - theta0)/se, per coordinate
  Eigen::MatrixXd theta_cov_diag; // per-rep diag of avar_hessian / n
  Eigen::MatrixXd orig_estimates; // per-rep (beta_hat, sigma2_hat)
  Eigen::MatrixXd orig_cov_diag;  // per-rep diag of the delta-method cov
  Eigen::VectorXd ks_stats;       // per coordinate
  Eigen::VectorXd ks_pvalues;
  Eigen::VectorXd ci_coverage;    // share of reps whose 95% CI covers truth
};

McReport normality_experiment(ModelKind kind, const DgpConfig& cfg,
                              Eigen::Index n_reps,
                              const FitOptions& fit_opts = {});

}  // namespace censreg
