#include "censreg/truncated.hpp"

#include <cmath>
#include <string>

#include "censreg/special_fn.hpp"

namespace censreg {
namespace truncated {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

struct ObsTerms {
  double u;  // gamma*y - x'delta
  double v;  // gamma*c - x'delta
};

ObsTerms terms(const Observation& obs, const ReparamPoint& p, double c) {
  if (obs.x.size() != p.delta.size()) {
    throw DomainError("truncated: x and delta dimensions disagree");
  }
  if (!std::isfinite(obs.y) || !obs.x.allFinite() || !std::isfinite(c)) {
    throw DomainError("truncated: observation and threshold must be finite");
  }
  if (!(obs.y > c)) {
    throw ValidationError("truncated: y must exceed the threshold c");
  }
  const double xd = obs.x.dot(p.delta);
  return {p.gamma * obs.y - xd, p.gamma * c - xd};
}

}  // namespace

double loglik_obs(const Observation& obs, const ReparamPoint& p, double c) {
  const ObsTerms t = terms(obs, p, c);
  return -kLogSqrt2Pi + std::log(p.gamma) - 0.5 * t.u * t.u -
         log_survival(t.v);
}

Eigen::VectorXd score_obs(const Observation& obs, const ReparamPoint& p,
                          double c) {
  const ObsTerms t = terms(obs, p, c);
  const double lam = mills_ratio(t.v);
  Eigen::VectorXd s(p.k() + 1);
  s.head(p.k()) = (t.u - lam) * obs.x;
  s(p.k()) = 1.0 / p.gamma - t.u * obs.y + lam * c;
  return s;
}

Eigen::MatrixXd hessian_obs(const Observation& obs, const ReparamPoint& p,
                            double c) {
  const ObsTerms t = terms(obs, p, c);
  const double dm = mills_delta(t.v);
  const auto k = p.k();
  Eigen::MatrixXd h(k + 1, k + 1);
  h.topLeftCorner(k, k).noalias() = (dm - 1.0) * (obs.x * obs.x.transpose());
  h.topRightCorner(k, 1) = (obs.y - dm * c) * obs.x;
  h.bottomLeftCorner(1, k) = h.topRightCorner(k, 1).transpose();
  h(k, k) = -(1.0 / (p.gamma * p.gamma) + obs.y * obs.y) + dm * c * c;
  return h;
}

ScoreHessian eval_obs(const Observation& obs, const ReparamPoint& p, double c) {
  const ObsTerms t = terms(obs, p, c);
  const HazardValue h = hazard(t.v);
  const auto k = p.k();

  ScoreHessian out;
  out.loglik = -kLogSqrt2Pi + std::log(p.gamma) - 0.5 * t.u * t.u -
               log_survival(t.v);

  out.score.resize(k + 1);
  out.score.head(k) = (t.u - h.lambda) * obs.x;
  out.score(k) = 1.0 / p.gamma - t.u * obs.y + h.lambda * c;

  out.hessian.resize(k + 1, k + 1);
  out.hessian.topLeftCorner(k, k).noalias() =
      (h.delta - 1.0) * (obs.x * obs.x.transpose());
  out.hessian.topRightCorner(k, 1) = (obs.y - h.delta * c) * obs.x;
  out.hessian.bottomLeftCorner(1, k) =
      out.hessian.topRightCorner(k, 1).transpose();
  out.hessian(k, k) =
      -(1.0 / (p.gamma * p.gamma) + obs.y * obs.y) + h.delta * c * c;
  return out;
}

double truncated_mean(double x_beta, double sigma, double c) {
  if (!std::isfinite(x_beta) || !std::isfinite(c) || !(sigma > 0.0) ||
      !std::isfinite(sigma)) {
    throw DomainError("truncated_mean: requires finite arguments, sigma > 0");
  }
  const double a = (c - x_beta) / sigma;
  return x_beta + sigma * mills_ratio(a);
}

double truncated_var(double x_beta, double sigma, double c) {
  if (!std::isfinite(x_beta) || !std::isfinite(c) || !(sigma > 0.0) ||
      !std::isfinite(sigma)) {
    throw DomainError("truncated_var: requires finite arguments, sigma > 0");
  }
  const double a = (c - x_beta) / sigma;
  return sigma * sigma * (1.0 - mills_delta(a));
}

}  // namespace truncated

Dataset Dataset::truncated(Eigen::VectorXd y, Eigen::MatrixXd x, double c) {
  if (y.rows() != x.rows()) {
    throw ValidationError("dataset: y and x row counts disagree");
  }
  if (y.rows() < 1 || x.cols() < 1) {
    throw DegenerateDataError("dataset: needs at least one row and one column");
  }
  if (!std::isfinite(c)) throw DomainError("dataset: threshold must be finite");
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    if (!std::isfinite(y(i)) || !x.row(i).allFinite()) {
      throw ValidationError("dataset: non-finite value in row " +
                                std::to_string(i),
                            i);
    }
    if (!(y(i) > c)) {
      throw ValidationError(
          "dataset: truncated sample requires y > c, violated in row " +
              std::to_string(i),
          i);
    }
  }
  Dataset d;
  d.kind_ = ModelKind::truncated;
  d.c_ = c;
  d.y_ = std::move(y);
  d.x_ = std::move(x);
  return d;
}

}  // namespace censreg
