#include <cmath>

#include "doctest.h"

#include "censreg/rng.hpp"
#include "censreg/tobit.hpp"

using namespace censreg;
namespace tb = censreg::tobit;

namespace {

CensoredObservation make_cobs(double y, std::initializer_list<double> x,
                              bool censored) {
  CensoredObservation o;
  o.y = y;
  o.x = Eigen::VectorXd(static_cast<Eigen::Index>(x.size()));
  Eigen::Index i = 0;
  for (double xi : x) o.x(i++) = xi;
  o.censored = censored;
  return o;
}

Eigen::VectorXd fd_score(const CensoredObservation& o, const ReparamPoint& p,
                         double c, double h) {
  const Eigen::VectorXd base = p.packed();
  Eigen::VectorXd g(base.size());
  for (Eigen::Index j = 0; j < base.size(); ++j) {
    Eigen::VectorXd up = base, dn = base;
    up(j) += h;
    dn(j) -= h;
    g(j) = (tb::loglik_obs(o, ReparamPoint::unpack(up), c) -
            tb::loglik_obs(o, ReparamPoint::unpack(dn), c)) /
           (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const CensoredObservation& o, const ReparamPoint& p,
                           double c, double h) {
  const Eigen::VectorXd base = p.packed();
  Eigen::MatrixXd m(base.size(), base.size());
  for (Eigen::Index j = 0; j < base.size(); ++j) {
    Eigen::VectorXd up = base, dn = base;
    up(j) += h;
    dn(j) -= h;
    m.col(j) = (tb::score_obs(o, ReparamPoint::unpack(up), c) -
                tb::score_obs(o, ReparamPoint::unpack(dn), c)) /
               (2.0 * h);
  }
  return m;
}

}  // namespace

TEST_CASE("observation rule records the threshold and the flag") {
  const auto above = tb::censor(1.7, 0.0);
  CHECK(above.y == 1.7);
  CHECK_FALSE(above.censored);
  const auto below = tb::censor(-0.3, 0.0);
  CHECK(below.y == 0.0);
  CHECK(below.censored);
  const auto at = tb::censor(0.0, 0.0);  // ties go to the censored side
  CHECK(at.y == 0.0);
  CHECK(at.censored);
}

TEST_CASE("log likelihood matches high precision references") {
  const ReparamPoint p(Eigen::VectorXd::Zero(1), 1.0);
  CHECK(tb::loglik_obs(make_cobs(1.0, {1.0}, false), p, 0.0) ==
        doctest::Approx(-1.41893853320467274).epsilon(1e-14));
  // Censored at v = 0: log Phi(0).
  CHECK(tb::loglik_obs(make_cobs(0.0, {1.0}, true), p, 0.0) ==
        doctest::Approx(-0.693147180559945309).epsilon(1e-14));
  // Censored deep in the tail: log Phi(-5) via x'delta = 5, c = 0.
  const ReparamPoint p5((Eigen::VectorXd(1) << 5.0).finished(), 1.0);
  CHECK(tb::loglik_obs(make_cobs(0.0, {1.0}, true), p5, 0.0) ==
        doctest::Approx(-15.0649983939887257).epsilon(1e-14));
}

TEST_CASE("score and hessian at the censored hand point") {
  const ReparamPoint p(Eigen::VectorXd::Zero(1), 1.0);
  const auto o = make_cobs(0.0, {1.0}, true);
  const Eigen::VectorXd s = tb::score_obs(o, p, 0.0);
  CHECK(s(0) == doctest::Approx(-0.797884560802865356).epsilon(1e-14));
  CHECK(s(1) == doctest::Approx(0.0).epsilon(1e-15));
  const Eigen::MatrixXd h = tb::hessian_obs(o, p, 0.0);
  CHECK(h(0, 0) == doctest::Approx(-0.636619772367581343).epsilon(1e-14));
  CHECK(h(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(h(1, 1) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("score and hessian agree with finite differences at random points") {
  Rng rng(5150);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(3 * rng.next_uniform());
    Eigen::VectorXd delta(k), x(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      delta(j) = 1.5 * rng.next_normal();
      x(j) = rng.next_normal();
    }
    const double gamma = 0.3 + 2.0 * rng.next_uniform();
    const double c = rng.next_normal();
    const ReparamPoint p(delta, gamma);
    const bool censored = rng.next_uniform() < 0.5;
    CensoredObservation o;
    o.censored = censored;
    o.x = x;
    o.y = censored ? c : c + std::fabs(rng.next_normal()) / gamma + 1e-3;

    const Eigen::VectorXd s = tb::score_obs(o, p, c);
    const Eigen::VectorXd fs = fd_score(o, p, c, 1e-6);
    const Eigen::MatrixXd h = tb::hessian_obs(o, p, c);
    const Eigen::MatrixXd fh = fd_hessian(o, p, c, 1e-5);
    CAPTURE(rep);
    CAPTURE(censored);
    for (Eigen::Index j = 0; j <= k; ++j) {
      CHECK(std::fabs(s(j) - fs(j)) <=
            1e-6 * std::max(1.0, std::fabs(s(j))));
    }
    for (Eigen::Index a = 0; a <= k; ++a) {
      for (Eigen::Index b = 0; b <= k; ++b) {
        CHECK(std::fabs(h(a, b) - fh(a, b)) <=
              1e-5 * std::max(1.0, std::fabs(h(a, b))));
      }
    }
    const ScoreHessian all = tb::eval_obs(o, p, c);
    CHECK(all.loglik == tb::loglik_obs(o, p, c));
    CHECK((all.score - s).cwiseAbs().maxCoeff() == 0.0);
    CHECK((all.hessian - h).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("per-observation hessian is negative semidefinite everywhere") {
  // This is the structural fact behind the optimizer's global convergence:
  // both censored and uncensored contributions curve downward (or are flat).
  Rng rng(777);
  for (int rep = 0; rep < 1000; ++rep) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(3 * rng.next_uniform());
    Eigen::VectorXd delta(k), x(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      delta(j) = 2.0 * rng.next_normal();
      x(j) = 2.0 * rng.next_normal();
    }
    const double gamma = 0.05 + 3.0 * rng.next_uniform();
    const double c = 2.0 * rng.next_normal();
    const ReparamPoint p(delta, gamma);
    const bool censored = rng.next_uniform() < 0.5;
    CensoredObservation o;
    o.censored = censored;
    o.x = x;
    o.y = censored ? c : c + std::fabs(rng.next_normal()) / gamma + 1e-3;

    const Eigen::MatrixXd h = tb::hessian_obs(o, p, c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (h + h.transpose()));
    CAPTURE(rep);
    CHECK(es.eigenvalues().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("conditional moment ladder matches references") {
  {
    const auto m = tb::truncated_moments(0.0);
    CHECK(m.m1 == doctest::Approx(0.797884560802865356).epsilon(1e-14));
    CHECK(m.m2 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.m3 == doctest::Approx(1.59576912160573071).epsilon(1e-14));
    CHECK(m.m4 == doctest::Approx(3.0).epsilon(1e-14));
  }
  {
    const auto m = tb::truncated_moments(1.5);
    CHECK(m.m1 == doctest::Approx(1.93867716662254319).epsilon(1e-14));
    CHECK(m.m2 == doctest::Approx(3.90801574993381478).epsilon(1e-14));
    CHECK(m.m3 == doctest::Approx(8.23937795814580856).epsilon(1e-14));
    CHECK(m.m4 == doctest::Approx(18.2670826871525276).epsilon(1e-14));
  }
  {
    // Far left threshold: conditioning does nothing, so the moments collapse
    // to the unconditional normal moments 0, 1, 0, 3 (up to a e-193 sliver).
    const auto m = tb::truncated_moments(-30.0);
    CHECK(m.m1 == doctest::Approx(1.47364613487854752e-196).epsilon(1e-13));
    CHECK(m.m2 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.m3 == doctest::Approx(1.32922881366044986e-193).epsilon(1e-13));
    CHECK(m.m4 == doctest::Approx(3.0).epsilon(1e-14));
  }
}

TEST_CASE("moment ladder is internally consistent") {
  for (double v = -8.0; v <= 8.0; v += 0.31) {
    const auto m = tb::truncated_moments(v);
    CAPTURE(v);
    CHECK(m.m2 == doctest::Approx(v * m.m1 + 1.0).epsilon(1e-14));
    CHECK(m.m3 == doctest::Approx(v * v * m.m1 + 2.0 * m.m1).epsilon(1e-14));
    CHECK(m.m4 == doctest::Approx(v * v * v * m.m1 + 3.0 * m.m2).epsilon(1e-14));
    // All conditional absolute moments are positive, and m2 > m1^2 (variance).
    CHECK(m.m1 > 0.0);
    CHECK(m.m2 > m.m1 * m.m1);
    CHECK(m.m4 > 0.0);
  }
}

TEST_CASE("flag and value consistency is enforced") {
  const ReparamPoint p(Eigen::VectorXd::Zero(1), 1.0);
  // Censored rows must carry exactly the threshold value.
  CHECK_THROWS_AS(tb::loglik_obs(make_cobs(0.5, {1.0}, true), p, 0.0),
                  ValidationError);
  // Uncensored rows must sit strictly above it.
  CHECK_THROWS_AS(tb::loglik_obs(make_cobs(-0.5, {1.0}, false), p, 0.0),
                  ValidationError);
  CHECK_THROWS_AS(tb::score_obs(make_cobs(0.0, {1.0}, false), p, 0.0),
                  ValidationError);
}

TEST_CASE("dataset factory derives flags and clamps near misses") {
  Eigen::VectorXd y(4);
  y << 1.0, 0.0, -1e-12, 2.0;  // -1e-12 is a rounding casualty, not data
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 1);
  const Dataset d = Dataset::tobit(y, x, 0.0);
  CHECK(d.kind() == ModelKind::tobit);
  CHECK(d.n_censored() == 2);
  CHECK(d.is_censored(1));
  CHECK(d.is_censored(2));
  CHECK(d.y()(2) == 0.0);
  REQUIRE(d.clamped_rows().size() == 1);
  CHECK(d.clamped_rows()[0] == 2);

  // Clearly below the window is a hard data error.
  y(2) = -0.5;
  CHECK_THROWS_AS(Dataset::tobit(y, x, 0.0), ValidationError);
}

TEST_CASE("flagged factory enforces consistency") {
  Eigen::VectorXd y(2);
  y << 1.0, 0.0;
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 1);
  std::vector<std::uint8_t> flags = {0, 1};
  const Dataset ok = Dataset::tobit_flagged(y, x, flags, 0.0);
  CHECK(ok.n_censored() == 1);
  flags = {1, 1};  // first row claims censored but y != c
  CHECK_THROWS_AS(Dataset::tobit_flagged(y, x, flags, 0.0), ValidationError);
}
