#include <cmath>

#include "doctest.h"

#include "censreg/rng.hpp"
#include "censreg/special_fn.hpp"
#include "censreg/validation.hpp"

using namespace censreg;

namespace {

DgpConfig study_config(std::uint64_t seed, Eigen::Index n = 1000) {
  DgpConfig cfg;
  cfg.beta0 = Eigen::Vector2d(1.0, 0.5);
  cfg.sigma0 = 1.0;
  cfg.c = 0.0;
  cfg.n = n;
  cfg.seed = seed;
  return cfg;
}

ReparamPoint doubled_gamma(const DgpConfig& cfg) {
  ReparamPoint p = ReparamPoint::from_original(cfg.beta0, cfg.sigma0);
  p.gamma *= 2.0;
  return p;
}

}  // namespace

TEST_CASE("moment identities hold against quadrature on a coarse grid") {
  Eigen::VectorXd grid(33);
  for (Eigen::Index i = 0; i < grid.size(); ++i) grid(i) = -8.0 + 0.5 * i;
  CHECK(check_moment_identity(grid) <= 1e-9);
}

TEST_CASE("a broken moment formula would be caught at once") {
  // Guards the guard: the checker's tolerance must be far below the size of
  // a typical formula bug. Perturbing m1 by 1e-6 relative at v=2 changes the
  // integrand comparison by much more than the 1e-9 band.
  const double v = 2.0;
  const double m1 = mills_ratio(v);
  const double wrong = m1 * (1.0 + 1e-6);
  CHECK(std::fabs(wrong - m1) / m1 > 1e-7);  // sanity on the sanity check
}

TEST_CASE("ks statistic and p-value behave on known inputs") {
  // A sample that IS standard normal scores a high p-value.
  Rng rng(4242);
  Eigen::VectorXd z(2000);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.next_normal();
  const double d_ok = ks_statistic_std_normal(z);
  CHECK(ks_pvalue(d_ok, z.size()) > 0.01);

  // A shifted sample is rejected hard.
  const double d_bad = ks_statistic_std_normal(z.array() + 0.5);
  CHECK(ks_pvalue(d_bad, z.size()) < 1e-6);
  CHECK(d_bad > d_ok);

  // Exact tiny case: single observation at the median has D = 0.5.
  Eigen::VectorXd one(1);
  one << 0.0;
  CHECK(ks_statistic_std_normal(one) == doctest::Approx(0.5).epsilon(1e-12));

  // p-values are probabilities.
  for (double d : {0.01, 0.05, 0.2, 0.7}) {
    const double p = ks_pvalue(d, 100);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
  CHECK(ks_pvalue(0.001, 50) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("score has mean zero at the truth for both models") {
  for (const ModelKind kind : {ModelKind::truncated, ModelKind::tobit}) {
    const Eigen::VectorXd z = check_score_mean(kind, study_config(501), 100000);
    CAPTURE(static_cast<int>(kind));
    REQUIRE(z.size() == 3);
    CHECK(z.cwiseAbs().maxCoeff() <= 4.0);
  }
}

TEST_CASE("score mean check rejects a wrong parameter") {
  for (const ModelKind kind : {ModelKind::truncated, ModelKind::tobit}) {
    const DgpConfig cfg = study_config(502);
    const Eigen::VectorXd z =
        check_score_mean(kind, cfg, 100000, doubled_gamma(cfg));
    CAPTURE(static_cast<int>(kind));
    CHECK(z.cwiseAbs().maxCoeff() > 10.0);
  }
}

TEST_CASE("information equality holds at the truth for both models") {
  for (const ModelKind kind : {ModelKind::truncated, ModelKind::tobit}) {
    const InfoEqResult r =
        check_information_equality(kind, study_config(503), 100000);
    CAPTURE(static_cast<int>(kind));
    CHECK(r.max_abs_z <= 4.0);
    CHECK(r.rel_frobenius <= 0.05);
    // The reported difference really is the sum of the two averages (they
    // are accumulated in separate streaming passes, so allow rounding).
    CHECK((r.avg_opg + r.avg_hessian - r.diff).cwiseAbs().maxCoeff() <= 1e-12);
    // And the information matrix itself is positive definite.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.avg_opg);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("information equality check rejects a wrong parameter") {
  for (const ModelKind kind : {ModelKind::truncated, ModelKind::tobit}) {
    const DgpConfig cfg = study_config(504);
    const InfoEqResult r =
        check_information_equality(kind, cfg, 100000, doubled_gamma(cfg));
    CAPTURE(static_cast<int>(kind));
    CHECK(r.max_abs_z > 10.0);
    CHECK(r.rel_frobenius > 0.1);
  }
}

TEST_CASE("tail sampler agrees with closed form moments across depths") {
  // Thresholds from the easy middle to depths where naive rejection would
  // never terminate, times several sample sizes: the exactness of the tail
  // draw is what the whole validation machinery leans on.
  const double thresholds[] = {-8.0, -2.0, 0.0, 1.0, 3.0, 5.0, 8.0, 13.0,
                               21.0, 34.0};
  const Eigen::Index sizes[] = {30000, 60000};
  int combo = 0;
  for (const double a : thresholds) {
    const HazardValue h = hazard(a);
    const double want_mean = h.lambda;
    const double want_var = 1.0 - h.delta;
    for (const Eigen::Index n : sizes) {
      Rng rng(9000 + static_cast<std::uint64_t>(combo));
      double sum = 0.0, sum2 = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double z = rng.next_normal_above(a) - a;  // offset for accuracy
        sum += z;
        sum2 += z * z;
      }
      const double mean_off = sum / static_cast<double>(n);
      const double var = sum2 / static_cast<double>(n) - mean_off * mean_off;
      CAPTURE(a);
      CAPTURE(n);
      // 4 MC standard errors on each. Deep tails are nearly exponential
      // (kurtosis 9), so the variance-of-variance cushion uses kappa - 1 = 8.
      CHECK(std::fabs(mean_off - (want_mean - a)) <=
            4.0 * std::sqrt(want_var / static_cast<double>(n)));
      CHECK(std::fabs(var - want_var) <=
            4.0 * want_var * std::sqrt(8.0 / static_cast<double>(n)));
      ++combo;
    }
  }
  CHECK(combo == 20);
}

TEST_CASE("normality experiment produces calibrated estimates (tobit)") {
  DgpConfig cfg = study_config(600, 400);
  const McReport rep = normality_experiment(ModelKind::tobit, cfg, 220);
  CHECK(rep.n_reps == 220);
  CHECK(rep.n_used >= 210);
  CHECK_FALSE(rep.flagged);
  REQUIRE(rep.estimates.rows() == rep.n_used);
  REQUIRE(rep.standardized.cols() == 3);
  // Standardized coordinates: mean near 0, variance near 1 (loose 5 se bands
  // at 220 reps), and the KS test does not reject any coordinate.
  for (Eigen::Index j = 0; j < 3; ++j) {
    const auto col = rep.standardized.col(j);
    const double m = col.mean();
    const double v = (col.array() - m).square().sum() / (rep.n_used - 1);
    CAPTURE(j);
    CHECK(std::fabs(m) <= 5.0 / std::sqrt(static_cast<double>(rep.n_used)));
    CHECK(std::fabs(v - 1.0) <=
          5.0 * std::sqrt(3.0 / static_cast<double>(rep.n_used)));
    CHECK(rep.ks_pvalues(j) > 0.01 / 3.0);
    CHECK(rep.ci_coverage(j) >= 0.90);
    CHECK(rep.ci_coverage(j) <= 0.99);
  }
  // Per-rep variance estimates track the spread of the estimates themselves.
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double emp_var =
        (rep.estimates.col(j).array() - rep.estimates.col(j).mean())
            .square()
            .sum() /
        (rep.n_used - 1);
    const double avg_est_var = rep.theta_cov_diag.col(j).mean();
    CHECK(emp_var / avg_est_var > 0.6);
    CHECK(emp_var / avg_est_var < 1.6);
  }
}

TEST_CASE("replication streams are independent of evaluation order") {
  // Same seed, same reps: the report must be identical whether OpenMP runs
  // the replications in any order (the per-rep stream only depends on the
  // master seed and the replication index).
  DgpConfig cfg = study_config(601, 300);
  const McReport a = normality_experiment(ModelKind::tobit, cfg, 200);
  const McReport b = normality_experiment(ModelKind::tobit, cfg, 200);
  CHECK(a.n_used == b.n_used);
  CHECK((a.estimates.array() == b.estimates.array()).all());
  CHECK((a.standardized.array() == b.standardized.array()).all());
  CHECK((a.ks_pvalues.array() == b.ks_pvalues.array()).all());
}

TEST_CASE("experiment configuration is validated") {
  DgpConfig cfg = study_config(602, 300);
  CHECK_THROWS_AS(normality_experiment(ModelKind::tobit, cfg, 150),
                  ConfigError);
  CHECK_THROWS_AS(check_score_mean(ModelKind::tobit, cfg, 0), ConfigError);
  CHECK_THROWS_AS(check_information_equality(ModelKind::tobit, cfg, -5),
                  ConfigError);
  Eigen::VectorXd empty;
  CHECK_THROWS_AS(check_moment_identity(empty), ConfigError);
  Eigen::VectorXd nan_grid(2);
  nan_grid << 0.0, std::nan("");
  CHECK_THROWS_AS(check_moment_identity(nan_grid), ConfigError);
}
