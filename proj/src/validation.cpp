#include "censreg/validation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "censreg/quadrature.hpp"
#include "censreg/special_fn.hpp"
#include "censreg/tobit.hpp"
#include "censreg/truncated.hpp"

namespace censreg {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kZ975 = 1.959963984540054;

Dataset generate(ModelKind kind, const DgpConfig& cfg) {
  return kind == ModelKind::truncated ? gen_truncated(cfg) : gen_tobit(cfg);
}

ReparamPoint truth_of(const DgpConfig& cfg) {
  return ReparamPoint::from_original(cfg.beta0, cfg.sigma0);
}

// Refine an absolute tolerance from a coarse pass so the final answer is
// relatively accurate whatever the integral's magnitude.
double integrate_scaled(const std::function<double(double)>& g, double lo,
                        double hi) {
  const QuadratureResult coarse = integrate(g, lo, hi, 1e-3, 8192);
  const double tol = 1e-12 * std::max(std::fabs(coarse.value), 1e-300);
  return integrate(g, lo, hi, tol, 8192).value;
}

// One conditional moment E[Z^i | Z > v] by quadrature.
double quad_moment(double v, int order) {
  const double log_s = log_survival(v);
  if (order % 2 == 1 && v < 0.0) {
    // z^i phi(z) is odd, so the integral over (v, -v) vanishes exactly and
    // only the tail above -v survives; normalize by phi(-v)/S(v) to keep the
    // integrand O(1) in relative terms even when the moment is ~1e-15.
    const double a = -v;
    const double scale = std::exp(-0.5 * a * a - kLogSqrt2Pi - log_s);
    auto g = [order, a, scale](double z) {
      double zp = 1.0;
      for (int i = 0; i < order; ++i) zp *= z;
      return zp * scale * std::exp(-0.5 * (z - a) * (z + a));
    };
    return integrate_scaled(g, a, a + 40.0);
  }
  auto g = [order, log_s](double z) {
    double zp = 1.0;
    for (int i = 0; i < order; ++i) zp *= z;
    return zp * std::exp(-0.5 * z * z - kLogSqrt2Pi - log_s);
  };
  return integrate_scaled(g, v, std::max(v, 0.0) + 40.0);
}

}  // namespace

double ks_statistic_std_normal(Eigen::VectorXd sample) {
  if (sample.size() < 1 || !sample.allFinite()) {
    throw DomainError("ks_statistic: needs a nonempty finite sample");
  }
  std::sort(sample.data(), sample.data() + sample.size());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    const double f = std_normal_cdf(sample(i));
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  return d;
}

double ks_pvalue(double d, Eigen::Index n) {
  if (!(d >= 0.0) || n < 1) throw DomainError("ks_pvalue: bad arguments");
  const double sn = std::sqrt(static_cast<double>(n));
  const double lam = (sn + 0.12 + 0.11 / sn) * d;
  const double a2 = -2.0 * lam * lam;
  double sum = 0.0;
  double fac = 2.0;
  double prev = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = fac * std::exp(a2 * j * j);
    sum += term;
    if (std::fabs(term) <= 0.001 * prev || std::fabs(term) <= 1e-10 * sum) {
      return std::clamp(sum, 0.0, 1.0);
    }
    fac = -fac;
    prev = std::fabs(term);
  }
  return 1.0;  // series failed to settle: statistic is tiny, p is ~1
}

double check_moment_identity(const Eigen::VectorXd& v_grid) {
  if (!v_grid.allFinite() || v_grid.size() < 1) {
    throw ConfigError("check_moment_identity: grid must be finite and nonempty");
  }
  double worst = 0.0;
  for (Eigen::Index gi = 0; gi < v_grid.size(); ++gi) {
    const double v = v_grid(gi);
    const tobit::TruncatedMoments m = tobit::truncated_moments(v);
    const double closed[4] = {m.m1, m.m2, m.m3, m.m4};
    for (int order = 1; order <= 4; ++order) {
      const double q = quad_moment(v, order);
      const double denom = std::fabs(closed[order - 1]);
      worst = std::max(worst, std::fabs(q - closed[order - 1]) / denom);
    }
  }
  return worst;
}

Eigen::VectorXd check_score_mean(ModelKind kind, const DgpConfig& cfg,
                                 Eigen::Index n_mc,
                                 const std::optional<ReparamPoint>& theta_eval) {
  DgpConfig big = cfg;
  big.n = n_mc;
  const Dataset data = generate(kind, big);
  const ReparamPoint at = theta_eval ? *theta_eval : truth_of(cfg);

  const SampleEval ev = eval_sample(data, at);
  const Eigen::MatrixXd opg = eval_opg(data, at);
  Eigen::VectorXd z(ev.score.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double var = opg(j, j) - ev.score(j) * ev.score(j);
    const double se =
        std::sqrt(std::max(var, 1e-300) / static_cast<double>(n_mc));
    z(j) = ev.score(j) / se;
  }
  return z;
}

InfoEqResult check_information_equality(
    ModelKind kind, const DgpConfig& cfg, Eigen::Index n_mc,
    const std::optional<ReparamPoint>& theta_eval) {
  DgpConfig big = cfg;
  big.n = n_mc;
  const Dataset data = generate(kind, big);
  const ReparamPoint at = theta_eval ? *theta_eval : truth_of(cfg);
  const auto k = data.k();

  Eigen::MatrixXd sum_d = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::MatrixXd sum_d2 = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::MatrixXd sum_opg = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::MatrixXd sum_h = Eigen::MatrixXd::Zero(k + 1, k + 1);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    ScoreHessian sh;
    if (kind == ModelKind::truncated) {
      sh = truncated::eval_obs(data.obs(i), at, data.c());
    } else {
      sh = tobit::eval_obs(data.cobs(i), at, data.c());
    }
    const Eigen::MatrixXd d =
        sh.score * sh.score.transpose() + sh.hessian;
    sum_d += d;
    sum_d2 += d.cwiseProduct(d);
    sum_opg += sh.score * sh.score.transpose();
    sum_h += sh.hessian;
  }
  const double n = static_cast<double>(data.n());

  InfoEqResult out;
  out.avg_opg = sum_opg / n;
  out.avg_hessian = sum_h / n;
  out.diff = sum_d / n;
  out.se.resize(k + 1, k + 1);
  out.max_abs_z = 0.0;
  for (Eigen::Index r = 0; r < k + 1; ++r) {
    for (Eigen::Index cidx = 0; cidx < k + 1; ++cidx) {
      const double var = sum_d2(r, cidx) / n - out.diff(r, cidx) * out.diff(r, cidx);
      out.se(r, cidx) = std::sqrt(std::max(var, 1e-300) / n);
      out.max_abs_z = std::max(
          out.max_abs_z, std::fabs(out.diff(r, cidx)) / out.se(r, cidx));
    }
  }
  out.rel_frobenius = out.diff.norm() / out.avg_opg.norm();
  return out;
}

McReport normality_experiment(ModelKind kind, const DgpConfig& cfg,
                              Eigen::Index n_reps,
                              const FitOptions& fit_opts) {
  if (n_reps < 200) {
    throw ConfigError(
        "normality_experiment: needs at least 200 replications");
  }
  const ReparamPoint theta0 = truth_of(cfg);
  const auto k = cfg.beta0.size();
  const Eigen::VectorXd truth_packed = theta0.packed();
  Eigen::VectorXd truth_orig(k + 1);
  truth_orig.head(k) = cfg.beta0;
  truth_orig(k) = cfg.sigma0 * cfg.sigma0;

  Eigen::MatrixXd estimates(n_reps, k + 1);
  Eigen::MatrixXd standardized(n_reps, k + 1);
  Eigen::MatrixXd theta_cov_diag(n_reps, k + 1);
  Eigen::MatrixXd orig_estimates(n_reps, k + 1);
  Eigen::MatrixXd orig_cov_diag(n_reps, k + 1);
  std::vector<std::uint8_t> ok(static_cast<size_t>(n_reps), 0);

  FitOptions per_rep = fit_opts;
  per_rep.exec = Exec::serial;  // parallelism lives across replications

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (Eigen::Index r = 0; r < n_reps; ++r) {
    try {
      DgpConfig rep_cfg = cfg;
      rep_cfg.seed = cfg.seed ^ static_cast<std::uint64_t>(r);
      const Dataset data = generate(kind, rep_cfg);
      const FitResult res = fit(data, per_rep);
      if (!res.converged || res.avar_hessian.size() == 0) continue;
      estimates.row(r) = res.theta_hat.packed().transpose();
      for (Eigen::Index j = 0; j < k + 1; ++j) {
        const double var_j =
            res.avar_hessian(j, j) / static_cast<double>(res.n);
        theta_cov_diag(r, j) = var_j;
        standardized(r, j) =
            (estimates(r, j) - truth_packed(j)) / std::sqrt(var_j);
      }
      orig_estimates.row(r).head(k) = res.orig.beta.transpose();
      orig_estimates(r, k) = res.orig.sigma2;
      orig_cov_diag.row(r) = res.orig.cov.diagonal().transpose();
      ok[static_cast<size_t>(r)] = 1;
    } catch (const Error&) {
      // Recorded as a failed replication below.
    }
  }

  McReport rep;
  rep.n_reps = n_reps;
  Eigen::Index used = 0;
  for (auto flag : ok) used += flag;
  rep.n_used = used;
  rep.n_failures = n_reps - used;
  rep.flagged = rep.n_failures * 50 > n_reps;  // more than 2%

  rep.estimates.resize(used, k + 1);
  rep.standardized.resize(used, k + 1);
  rep.theta_cov_diag.resize(used, k + 1);
  rep.orig_estimates.resize(used, k + 1);
  rep.orig_cov_diag.resize(used, k + 1);
  Eigen::Index w = 0;
  for (Eigen::Index r = 0; r < n_reps; ++r) {
    if (!ok[static_cast<size_t>(r)]) continue;
    rep.estimates.row(w) = estimates.row(r);
    rep.standardized.row(w) = standardized.row(r);
    rep.theta_cov_diag.row(w) = theta_cov_diag.row(r);
    rep.orig_estimates.row(w) = orig_estimates.row(r);
    rep.orig_cov_diag.row(w) = orig_cov_diag.row(r);
    ++w;
  }

  rep.ks_stats.resize(k + 1);
  rep.ks_pvalues.resize(k + 1);
  rep.ci_coverage.resize(k + 1);
  for (Eigen::Index j = 0; j < k + 1; ++j) {
    if (used < 1) {
      rep.ks_stats(j) = 1.0;
      rep.ks_pvalues(j) = 0.0;
      rep.ci_coverage(j) = 0.0;
      continue;
    }
    rep.ks_stats(j) = ks_statistic_std_normal(rep.standardized.col(j));
    rep.ks_pvalues(j) = ks_pvalue(rep.ks_stats(j), used);
    rep.ci_coverage(j) =
        (rep.standardized.col(j).cwiseAbs().array() <= kZ975)
            .cast<double>()
            .mean();
  }
  return rep;
}

}  // namespace censreg
