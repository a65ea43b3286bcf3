#pragma once

#include <Eigen/Dense>

#include "censreg/types.hpp"

namespace censreg {
namespace truncated {

// Per-observation log conditional likelihood of y given x and y > c, in the
// (delta, gamma) coordinates: with u = gamma*y - x'delta and
// v = gamma*c - x'delta,
//   l = -log sqrt(2 pi) + log gamma - u^2/2 - log(1 - Phi(v)).
// Requires y > c; gamma > 0 is enforced by ReparamPoint.
double loglik_obs(const Observation& obs, const ReparamPoint& p, double c);

// Gradient of loglik_obs in (delta_1..delta_K, gamma) order:
//   d/d delta = (u - lambda(v)) * x,   d/d gamma = 1/gamma - u*y + lambda(v)*c.
Eigen::VectorXd score_obs(const Observation& obs, const ReparamPoint& p,
                          double c);

// Hessian of loglik_obs, (K+1)x(K+1), symmetric:
//   H = -[x x', -y x; -y x', 1/gamma^2 + y^2]
//       + mills_delta(v) * [x x', -c x; -c x', c^2].
Eigen::MatrixXd hessian_obs(const Observation& obs, const ReparamPoint& p,
                            double c);

// All three at once, sharing the hazard evaluation.
ScoreHessian eval_obs(const Observation& obs, const ReparamPoint& p, double c);

// E[y | x, y > c] and Var[y | x, y > c] in original coordinates:
//   mean = x'beta + sigma * lambda(a),  var = sigma^2 * (1 - mills_delta(a))
// with a = (c - x'beta) / sigma. The variance is strictly inside
// (0, sigma^2): truncation always removes spread.
double truncated_mean(double x_beta, double sigma, double c);
double truncated_var(double x_beta, double sigma, double c);

}  // namespace truncated
}  // namespace censreg
