#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "censreg/errors.hpp"

namespace censreg {

enum class ModelKind { truncated, tobit };

// Working coordinates: delta = beta / sigma, gamma = 1 / sigma. The Tobit
// log likelihood is concave in these, which is why the optimizer lives here
// and (beta, sigma^2) are only recovered at the end.
struct ReparamPoint {
  Eigen::VectorXd delta;
  double gamma = 1.0;

  ReparamPoint() = default;
  ReparamPoint(Eigen::VectorXd d, double g) : delta(std::move(d)), gamma(g) {
    if (!(gamma > 0.0) || !std::isfinite(gamma) || !delta.allFinite()) {
      throw DomainError("ReparamPoint: requires finite delta and gamma > 0");
    }
  }

  static ReparamPoint from_original(const Eigen::VectorXd& beta, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw DomainError("ReparamPoint: sigma must be positive and finite");
    }
    return ReparamPoint(beta / sigma, 1.0 / sigma);
  }

  Eigen::Index k() const { return delta.size(); }
  Eigen::VectorXd beta() const { return delta / gamma; }
  double sigma2() const { return 1.0 / (gamma * gamma); }

  // Flat (delta_1..delta_K, gamma) layout used by the optimizer and reports.
  Eigen::VectorXd packed() const {
    Eigen::VectorXd out(k() + 1);
    out.head(k()) = delta;
    out(k()) = gamma;
    return out;
  }

  static ReparamPoint unpack(const Eigen::VectorXd& v) {
    return ReparamPoint(v.head(v.size() - 1), v(v.size() - 1));
  }
};

struct Observation {
  double y = 0.0;
  Eigen::VectorXd x;
};

struct CensoredObservation {
  double y = 0.0;
  Eigen::VectorXd x;
  bool censored = false;
};

// Log likelihood, score, and Hessian at one point (per observation or
// averaged over a sample, depending on who produced it).
struct ScoreHessian {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd hessian;
};

// Immutable sample. y is n-vector, x is n-by-K row-per-observation; the
// censoring flags are only meaningful for the Tobit model.
class Dataset {
 public:
  static Dataset truncated(Eigen::VectorXd y, Eigen::MatrixXd x, double c);

  // Builds a Tobit sample from raw y, deriving censoring flags: y == c (after
  // clamping values within 1e-9 * max(1,|c|) below c) is censored, y > c is
  // uncensored, anything lower is a hard error. Row indices of clamped values
  // are kept so callers can warn.
  static Dataset tobit(Eigen::VectorXd y, Eigen::MatrixXd x, double c);

  // Tobit sample with flags already known (e.g. straight from the simulator).
  static Dataset tobit_flagged(Eigen::VectorXd y, Eigen::MatrixXd x,
                               std::vector<std::uint8_t> censored, double c);

  ModelKind kind() const { return kind_; }
  double c() const { return c_; }
  Eigen::Index n() const { return y_.rows(); }
  Eigen::Index k() const { return x_.cols(); }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& x() const { return x_; }
  bool is_censored(Eigen::Index i) const {
    return kind_ == ModelKind::tobit && censored_[static_cast<size_t>(i)] != 0;
  }
  Eigen::Index n_censored() const { return n_censored_; }
  const std::vector<long>& clamped_rows() const { return clamped_rows_; }

  Observation obs(Eigen::Index i) const {
    return Observation{y_(i), x_.row(i).transpose()};
  }
  CensoredObservation cobs(Eigen::Index i) const {
    return CensoredObservation{y_(i), x_.row(i).transpose(), is_censored(i)};
  }

 private:
  Dataset() = default;

  ModelKind kind_ = ModelKind::truncated;
  double c_ = 0.0;
  Eigen::VectorXd y_;
  Eigen::MatrixXd x_;
  std::vector<std::uint8_t> censored_;
  Eigen::Index n_censored_ = 0;
  std::vector<long> clamped_rows_;
};

}  // namespace censreg
