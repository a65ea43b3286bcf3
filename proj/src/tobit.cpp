#include "censreg/tobit.hpp"

#include <cmath>
#include <string>

#include "censreg/special_fn.hpp"

namespace censreg {
namespace tobit {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void check_obs(const CensoredObservation& obs, const ReparamPoint& p,
               double c) {
  if (obs.x.size() != p.delta.size()) {
    throw DomainError("tobit: x and delta dimensions disagree");
  }
  if (!std::isfinite(obs.y) || !obs.x.allFinite() || !std::isfinite(c)) {
    throw DomainError("tobit: observation and threshold must be finite");
  }
  if (obs.censored) {
    if (obs.y != c) {
      throw ValidationError("tobit: censored observation must have y == c");
    }
  } else if (!(obs.y > c)) {
    throw ValidationError("tobit: uncensored observation must have y > c");
  }
}

}  // namespace

CensoredObservation censor(double y_star, double c) {
  if (!std::isfinite(y_star) || !std::isfinite(c)) {
    throw DomainError("censor: requires finite inputs");
  }
  CensoredObservation out;
  out.censored = !(y_star > c);
  out.y = out.censored ? c : y_star;
  return out;
}

double loglik_obs(const CensoredObservation& obs, const ReparamPoint& p,
                  double c) {
  check_obs(obs, p, c);
  const double xd = obs.x.dot(p.delta);
  if (obs.censored) {
    // log Phi(v) = log_survival(-v).
    return log_survival(xd - p.gamma * c);
  }
  const double u = p.gamma * obs.y - xd;
  return -kLogSqrt2Pi + std::log(p.gamma) - 0.5 * u * u;
}

Eigen::VectorXd score_obs(const CensoredObservation& obs,
                          const ReparamPoint& p, double c) {
  check_obs(obs, p, c);
  const auto k = p.k();
  const double xd = obs.x.dot(p.delta);
  Eigen::VectorXd s(k + 1);
  if (obs.censored) {
    const double lam = mills_ratio(xd - p.gamma * c);  // lambda(-v)
    s.head(k) = -lam * obs.x;
    s(k) = lam * c;
  } else {
    const double u = p.gamma * obs.y - xd;
    s.head(k) = u * obs.x;
    s(k) = 1.0 / p.gamma - u * obs.y;
  }
  return s;
}

Eigen::MatrixXd hessian_obs(const CensoredObservation& obs,
                            const ReparamPoint& p, double c) {
  check_obs(obs, p, c);
  const auto k = p.k();
  const double xd = obs.x.dot(p.delta);
  Eigen::MatrixXd h(k + 1, k + 1);
  if (obs.censored) {
    const double dm = mills_delta(xd - p.gamma * c);  // mills_delta(-v)
    h.topLeftCorner(k, k).noalias() = -dm * (obs.x * obs.x.transpose());
    h.topRightCorner(k, 1) = dm * c * obs.x;
    h.bottomLeftCorner(1, k) = h.topRightCorner(k, 1).transpose();
    h(k, k) = -dm * c * c;
  } else {
    h.topLeftCorner(k, k).noalias() = -(obs.x * obs.x.transpose());
    h.topRightCorner(k, 1) = obs.y * obs.x;
    h.bottomLeftCorner(1, k) = h.topRightCorner(k, 1).transpose();
    h(k, k) = -(1.0 / (p.gamma * p.gamma) + obs.y * obs.y);
  }
  return h;
}

ScoreHessian eval_obs(const CensoredObservation& obs, const ReparamPoint& p,
                      double c) {
  check_obs(obs, p, c);
  const auto k = p.k();
  const double xd = obs.x.dot(p.delta);
  ScoreHessian out;
  out.score.resize(k + 1);
  out.hessian.resize(k + 1, k + 1);
  if (obs.censored) {
    const double mv = xd - p.gamma * c;  // -v
    const HazardValue h = hazard(mv);
    out.loglik = log_survival(mv);
    out.score.head(k) = -h.lambda * obs.x;
    out.score(k) = h.lambda * c;
    out.hessian.topLeftCorner(k, k).noalias() =
        -h.delta * (obs.x * obs.x.transpose());
    out.hessian.topRightCorner(k, 1) = h.delta * c * obs.x;
    out.hessian.bottomLeftCorner(1, k) =
        out.hessian.topRightCorner(k, 1).transpose();
    out.hessian(k, k) = -h.delta * c * c;
  } else {
    const double u = p.gamma * obs.y - xd;
    out.loglik = -kLogSqrt2Pi + std::log(p.gamma) - 0.5 * u * u;
    out.score.head(k) = u * obs.x;
    out.score(k) = 1.0 / p.gamma - u * obs.y;
    out.hessian.topLeftCorner(k, k).noalias() =
        -(obs.x * obs.x.transpose());
    out.hessian.topRightCorner(k, 1) = obs.y * obs.x;
    out.hessian.bottomLeftCorner(1, k) =
        out.hessian.topRightCorner(k, 1).transpose();
    out.hessian(k, k) = -(1.0 / (p.gamma * p.gamma) + obs.y * obs.y);
  }
  return out;
}

TruncatedMoments truncated_moments(double v) {
  if (!std::isfinite(v)) throw DomainError("truncated_moments: v not finite");
  TruncatedMoments m;
  m.m1 = mills_ratio(v);
  m.m2 = v * m.m1 + 1.0;
  m.m3 = v * v * m.m1 + 2.0 * m.m1;
  m.m4 = v * v * v * m.m1 + 3.0 * m.m2;
  return m;
}

}  // namespace tobit

Dataset Dataset::tobit(Eigen::VectorXd y, Eigen::MatrixXd x, double c) {
  if (y.rows() != x.rows()) {
    throw ValidationError("dataset: y and x row counts disagree");
  }
  if (y.rows() < 1 || x.cols() < 1) {
    throw DegenerateDataError("dataset: needs at least one row and one column");
  }
  if (!std::isfinite(c)) throw DomainError("dataset: threshold must be finite");

  // Values a hair below c are treated as c (accumulated rounding from
  // whatever produced the file); anything clearly below is corrupt input.
  const double tol = 1e-9 * std::max(1.0, std::fabs(c));
  Dataset d;
  d.kind_ = ModelKind::tobit;
  d.c_ = c;
  d.censored_.assign(static_cast<size_t>(y.rows()), 0);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    if (!std::isfinite(y(i)) || !x.row(i).allFinite()) {
      throw ValidationError("dataset: non-finite value in row " +
                                std::to_string(i),
                            i);
    }
    if (y(i) > c) continue;
    if (y(i) < c - tol) {
      throw ValidationError(
          "dataset: tobit sample requires y >= c, violated in row " +
              std::to_string(i),
          i);
    }
    if (y(i) != c) d.clamped_rows_.push_back(static_cast<long>(i));
    y(i) = c;
    d.censored_[static_cast<size_t>(i)] = 1;
    ++d.n_censored_;
  }
  d.y_ = std::move(y);
  d.x_ = std::move(x);
  return d;
}

Dataset Dataset::tobit_flagged(Eigen::VectorXd y, Eigen::MatrixXd x,
                               std::vector<std::uint8_t> censored, double c) {
  if (y.rows() != x.rows() ||
      censored.size() != static_cast<size_t>(y.rows())) {
    throw ValidationError("dataset: y, x and flag sizes disagree");
  }
  if (y.rows() < 1 || x.cols() < 1) {
    throw DegenerateDataError("dataset: needs at least one row and one column");
  }
  if (!std::isfinite(c)) throw DomainError("dataset: threshold must be finite");
  Dataset d;
  d.kind_ = ModelKind::tobit;
  d.c_ = c;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    if (!std::isfinite(y(i)) || !x.row(i).allFinite()) {
      throw ValidationError("dataset: non-finite value in row " +
                                std::to_string(i),
                            i);
    }
    const bool cen = censored[static_cast<size_t>(i)] != 0;
    if (cen && y(i) != c) {
      throw ValidationError(
          "dataset: censored flag requires y == c in row " + std::to_string(i),
          i);
    }
    if (!cen && !(y(i) > c)) {
      throw ValidationError(
          "dataset: uncensored flag requires y > c in row " +
              std::to_string(i),
          i);
    }
    if (cen) ++d.n_censored_;
  }
  d.y_ = std::move(y);
  d.x_ = std::move(x);
  d.censored_ = std::move(censored);
  return d;
}

}  // namespace censreg
