#include "censreg/simulate.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "censreg/rng.hpp"
#include "censreg/special_fn.hpp"

namespace censreg {

namespace {

// log(1e-6): acceptance probabilities below this make the population
// practically unobservable and the rejection loop unbounded.
const double kLogMinAccept = std::log(1e-6);

void check_config(const DgpConfig& cfg) {
  if (cfg.beta0.size() < 1 || !cfg.beta0.allFinite()) {
    throw ConfigError("simulate: beta0 must be a nonempty finite vector");
  }
  if (!(cfg.sigma0 > 0.0) || !std::isfinite(cfg.sigma0)) {
    throw ConfigError("simulate: sigma0 must be positive and finite");
  }
  if (!std::isfinite(cfg.c)) {
    throw ConfigError("simulate: threshold c must be finite");
  }
  if (cfg.n < cfg.beta0.size() + 2) {
    throw ConfigError("simulate: n must be at least K+2");
  }
  if (cfg.user_x) {
    if (cfg.user_x->rows() != cfg.n || cfg.user_x->cols() != cfg.beta0.size()) {
      throw ConfigError("simulate: user_x must be n rows by K columns");
    }
    if (!cfg.user_x->allFinite()) {
      throw ConfigError("simulate: user_x has non-finite entries");
    }
  }
}

void draw_x(Rng& rng, const DgpConfig& cfg, Eigen::Ref<Eigen::RowVectorXd> x) {
  const Eigen::Index k = cfg.beta0.size();
  Eigen::Index j = 0;
  if (cfg.intercept) {
    x(0) = 1.0;
    j = 1;
  }
  for (; j < k; ++j) x(j) = rng.next_normal();
}

}  // namespace

Dataset gen_truncated(const DgpConfig& cfg) {
  check_config(cfg);
  const Eigen::Index k = cfg.beta0.size();
  Eigen::VectorXd y(cfg.n);
  Eigen::MatrixXd x(cfg.n, k);
  Rng rng(cfg.seed);
  Eigen::RowVectorXd proposal(k);

  for (Eigen::Index i = 0; i < cfg.n; ++i) {
    for (;;) {
      if (cfg.user_x) {
        proposal = cfg.user_x->row(i);
      } else {
        draw_x(rng, cfg, proposal);
      }
      const double xb = proposal.dot(cfg.beta0);
      const double a = (cfg.c - xb) / cfg.sigma0;
      // With a fixed design the tail draw below is exact at any depth and
      // there is nothing to reweight; with drawn regressors, thin proposals
      // by P(y > c | x) so the observed x distribution comes out right, and
      // refuse populations so rare the rejection loop would never finish.
      if (!cfg.user_x) {
        const double log_accept = log_survival(a);
        if (log_accept < kLogMinAccept) {
          throw PathologicalDgpError(
              "gen_truncated: acceptance probability below 1e-6 at x'beta = " +
              std::to_string(xb));
        }
        if (std::log(rng.next_uniform()) >= log_accept) continue;
      }

      x.row(i) = proposal;
      double yi;
      do {
        yi = xb + cfg.sigma0 * rng.next_normal_above(a);
      } while (!(yi > cfg.c));  // guards the one-ulp rounding collision
      y(i) = yi;
      break;
    }
  }
  return Dataset::truncated(std::move(y), std::move(x), cfg.c);
}

Dataset gen_tobit(const DgpConfig& cfg) {
  check_config(cfg);
  const Eigen::Index k = cfg.beta0.size();
  Eigen::VectorXd y(cfg.n);
  Eigen::MatrixXd x(cfg.n, k);
  std::vector<std::uint8_t> censored(static_cast<size_t>(cfg.n), 0);
  Rng rng(cfg.seed);
  Eigen::RowVectorXd row(k);

  for (Eigen::Index i = 0; i < cfg.n; ++i) {
    if (cfg.user_x) {
      row = cfg.user_x->row(i);
    } else {
      draw_x(rng, cfg, row);
    }
    x.row(i) = row;
    const double latent = row.dot(cfg.beta0) + cfg.sigma0 * rng.next_normal();
    if (latent > cfg.c) {
      y(i) = latent;
    } else {
      y(i) = cfg.c;
      censored[static_cast<size_t>(i)] = 1;
    }
  }
  return Dataset::tobit_flagged(std::move(y), std::move(x), std::move(censored),
                                cfg.c);
}

}  // namespace censreg
