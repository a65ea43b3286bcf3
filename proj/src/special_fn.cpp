#include "censreg/special_fn.hpp"

#include <cfloat>
#include <cmath>
#include <string>

#include "censreg/errors.hpp"

namespace censreg {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
// Largest double below 1.
constexpr double kOneBelow = 1.0 - 0x1p-53;

void require_finite(double v, const char* fn) {
  if (!std::isfinite(v)) {
    throw DomainError(std::string(fn) + ": argument must be finite, got " +
                      std::to_string(v));
  }
}

// 1 - Phi(v); relative accuracy until erfc underflows (v ~ 37.5).
double survival(double v) { return 0.5 * std::erfc(v * kInvSqrt2); }

// r(v) = lambda(v) - v for v > 0 via the Mills continued fraction
//   r = 1 / (v + 2 / (v + 3 / (v + 4 / ...))),
// evaluated with the modified Lentz scheme (leading term b0 = 0, numerators
// a_k = k). Computing the residual directly avoids the lambda - v
// cancellation. Converges fast for v >= 5.
double mills_residual_cf(double v) {
  constexpr double tiny = 1e-300;
  double f = tiny;
  double c = f;
  double d = 0.0;
  for (int k = 1; k <= 400; ++k) {
    const double a = static_cast<double>(k);
    d = v + a * d;
    if (d == 0.0) d = tiny;
    c = v + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double ratio = c * d;
    f *= ratio;
    if (std::fabs(ratio - 1.0) < 1e-16) break;
  }
  return f;
}

}  // namespace

double std_normal_pdf(double v) {
  require_finite(v, "std_normal_pdf");
  return kInvSqrt2Pi * std::exp(-0.5 * v * v);
}

double std_normal_cdf(double v) {
  require_finite(v, "std_normal_cdf");
  return 0.5 * std::erfc(-v * kInvSqrt2);
}

double mills_ratio(double v) {
  require_finite(v, "mills_ratio");
  if (v <= -37.0) {
    // 1 - Phi(v) = 1 up to ~1e-300 here; the pdf may underflow, keep positive.
    double lam = std_normal_pdf(v);
    return lam > 0.0 ? lam : DBL_TRUE_MIN;
  }
  if (v <= 5.0) return std_normal_pdf(v) / survival(v);
  double lam = v + mills_residual_cf(v);
  // lambda > v always; enforce at the rounding boundary (huge v only).
  if (lam <= v) lam = std::nextafter(v, HUGE_VAL);
  return lam;
}

double mills_delta(double v) {
  require_finite(v, "mills_delta");
  double d;
  if (v > 5.0) {
    // delta = lambda * (lambda - v) = v*r + r^2 with r the CF residual.
    // Two well-conditioned positive terms; stays below 1 without cancellation.
    const double r = mills_residual_cf(v);
    d = v * r + r * r;
  } else {
    const double lam = mills_ratio(v);
    d = lam * (lam - v);
  }
  if (d < DBL_TRUE_MIN) return DBL_TRUE_MIN;
  if (d > kOneBelow) return kOneBelow;
  return d;
}

HazardValue hazard(double v) {
  require_finite(v, "hazard");
  HazardValue h;
  h.v = v;
  if (v > 5.0) {
    const double r = mills_residual_cf(v);
    h.lambda = v + r;
    if (h.lambda <= v) h.lambda = std::nextafter(v, HUGE_VAL);
    h.delta = v * r + r * r;
  } else {
    h.lambda = mills_ratio(v);
    h.delta = h.lambda * (h.lambda - v);
  }
  if (h.delta < DBL_TRUE_MIN) h.delta = DBL_TRUE_MIN;
  if (h.delta > kOneBelow) h.delta = kOneBelow;
  return h;
}

double log_survival(double v) {
  require_finite(v, "log_survival");
  if (v >= 5.0) {
    // log(phi(v)/lambda(v)); exact in the log far past erfc underflow.
    return -0.5 * v * v - kLogSqrt2Pi - std::log(v + mills_residual_cf(v));
  }
  if (v <= -37.0) {
    // 1 - Phi(v) = 1 - eps with eps = Phi(v) below ~6e-300: log(1-eps) = -eps.
    return -std::exp(log_survival(-v));
  }
  if (v <= -1.0) return std::log1p(-std_normal_cdf(v));
  return std::log(survival(v));
}

double upper_quantile_log(double log_tail) {
  require_finite(log_tail, "upper_quantile_log");
  if (log_tail >= 0.0) {
    throw DomainError("upper_quantile_log: log tail probability must be < 0");
  }
  // log_survival is concave and strictly decreasing, so Newton converges from
  // any start; deep in the tail the update degenerates to the Babylonian
  // iteration for sqrt(-2 * log_tail), hence the crude start below is enough.
  double z = log_tail < -2.0 ? std::sqrt(-2.0 * log_tail) : 0.0;
  for (int it = 0; it < 60; ++it) {
    const double step = (log_survival(z) - log_tail) / mills_ratio(z);
    z += step;
    if (std::fabs(step) <= 1e-15 * (1.0 + std::fabs(z))) break;
  }
  return z;
}

double std_normal_quantile(double p) {
  require_finite(p, "std_normal_quantile");
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("std_normal_quantile: p must be in (0,1), got " +
                      std::to_string(p));
  }
  // Work in whichever tail keeps the probability away from 1. For p >= 0.5,
  // 1-p is exact (Sterbenz), so both branches are accurate.
  if (p >= 0.5) return upper_quantile_log(std::log1p(-p));
  return -upper_quantile_log(std::log(p));
}

}  // namespace censreg
