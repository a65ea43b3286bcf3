#pragma once

#include <functional>

namespace censreg {

// Adaptive Gauss-Kronrod 7/15 on a finite interval. Used as the independent
// oracle the validation checks compare closed forms against; it deliberately
// knows nothing about the model kernels. Throws OracleError if the absolute
// tolerance cannot be met within the subdivision budget.
struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;  // accumulated Kronrod error estimate
  int intervals = 0;       // leaf intervals actually used
};

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol = 1e-12,
                           int max_intervals = 4096);

}  // namespace censreg
