#pragma once

#include <Eigen/Dense>

#include "censreg/types.hpp"

namespace censreg {
namespace tobit {

// Observation rule: the latent y* is observed when above the threshold,
// otherwise the threshold itself is recorded and the flag is set.
CensoredObservation censor(double y_star, double c);

// Per-observation log likelihood in (delta, gamma) coordinates. With
// u = gamma*y - x'delta and v = gamma*c - x'delta:
//   uncensored: -log sqrt(2 pi) + log gamma - u^2/2
//   censored:   log Phi(v)   (the probability the latent value is below c)
// Requires flag/value consistency: censored implies y == c exactly,
// uncensored implies y > c.
double loglik_obs(const CensoredObservation& obs, const ReparamPoint& p,
                  double c);

// Gradient in (delta_1..delta_K, gamma) order:
//   uncensored: (u*x, 1/gamma - u*y)
//   censored:   lambda(-v) * (-x, c)
Eigen::VectorXd score_obs(const CensoredObservation& obs,
                          const ReparamPoint& p, double c);

// Hessian, symmetric (K+1)x(K+1):
//   uncensored: -[x x', -y x; -y x', 1/gamma^2 + y^2]
//   censored:   -mills_delta(-v) * [x x', -c x; -c x', c^2]
// Both pieces are negative semidefinite, which is what makes the Tobit
// objective concave in these coordinates.
Eigen::MatrixXd hessian_obs(const CensoredObservation& obs,
                            const ReparamPoint& p, double c);

// All three at once, sharing the hazard evaluation.
ScoreHessian eval_obs(const CensoredObservation& obs, const ReparamPoint& p,
                      double c);

// Conditional moments m_i = E[Z^i | Z > v] of a standard normal, orders 1-4:
//   m1 = lambda(v)
//   m2 = v*m1 + 1
//   m3 = v^2*m1 + 2*m1
//   m4 = v^3*m1 + 3*m2
// i.e. m_k = v^(k-1)*m1 + (k-1)*m_(k-2).
struct TruncatedMoments {
  double m1, m2, m3, m4;
};

TruncatedMoments truncated_moments(double v);

}  // namespace tobit
}  // namespace censreg
