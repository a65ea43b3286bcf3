#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "censreg/types.hpp"

namespace censreg {

// Data-generating configuration shared by both samplers. Regressors are
// either drawn per observation (an intercept column of ones followed by
// K-1 independent standard normals) or taken verbatim from user_x.
struct DgpConfig {
  Eigen::VectorXd beta0;
  double sigma0 = 1.0;
  double c = 0.0;
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
  bool intercept = true;  // only meaningful for drawn regressors
  std::optional<Eigen::MatrixXd> user_x;
};

// Truncated sample: only (y, x) pairs with y > c are observed, which also
// reweights the distribution of x toward high-acceptance regions. Drawn-x
// mode mimics that mechanism exactly: propose x, accept with probability
// P(y > c | x), then draw y from the conditional upper tail (no rejection on
// y, so deep truncation costs nothing). With user_x the design is fixed and
// y is drawn conditionally row by row.
// Throws PathologicalDgpError when some x has acceptance probability below
// 1e-6 (the population being simulated is practically unobservable there).
Dataset gen_truncated(const DgpConfig& cfg);

// Tobit sample: draw the latent y* = x'beta0 + sigma0*eps and censor at c.
Dataset gen_tobit(const DgpConfig& cfg);

}  // namespace censreg
