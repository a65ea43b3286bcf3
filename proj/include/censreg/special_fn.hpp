#pragma once

// Standard normal primitives tuned for deep-tail work. Everything downstream
// (likelihood kernels, samplers, quadrature oracles) goes through these, so
// they are written to stay relatively accurate far beyond where the naive
// phi/(1-Phi) formulas fall apart.

namespace censreg {

// Density of N(0,1). Underflows to 0 gracefully for |v| > ~38.6.
double std_normal_pdf(double v);

// P(Z <= v) via erfc; absolute accuracy ~1e-16, relative accuracy in the lower
// tail until erfc underflows near v = -37.5.
double std_normal_cdf(double v);

// log(1 - Phi(v)), accurate in the log for all finite v. For v >= 5 this uses
// log phi(v) - log lambda(v) with the continued-fraction hazard, so it keeps
// working long after 1 - Phi(v) itself underflows.
double log_survival(double v);

// Inverse Mills ratio lambda(v) = phi(v) / (1 - Phi(v)), i.e. the hazard of the
// standard normal. Strictly positive and > v for all v; for v > 5 evaluated as
// v + r with r from a continued fraction to avoid cancellation.
double mills_ratio(double v);

// d lambda / dv = lambda(v) * (lambda(v) - v). Lies in (0,1) for all finite v;
// clamped into [DBL_TRUE_MIN, 1 - 2^-53] at the representability limits.
double mills_delta(double v);

// lambda and its derivative at one point, sharing the expensive pieces.
struct HazardValue {
  double v;
  double lambda;
  double delta;
};

HazardValue hazard(double v);

// Solve log_survival(z) = log_tail for z, where log_tail < 0. Newton in log
// space; handles targets down past -1e15 (tail probabilities ~1e-300 and far
// smaller than representable).
double upper_quantile_log(double log_tail);

// Phi^{-1}(p) for p in (0,1), accurate in both tails.
double std_normal_quantile(double p);

}  // namespace censreg
