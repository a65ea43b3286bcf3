#include "censreg/quadrature.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "censreg/errors.hpp"

namespace censreg {

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1,1] (positive half; the rule is
// symmetric). Even-indexed Kronrod nodes are the embedded Gauss-7 nodes.
constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
constexpr double kWgk[8] = {
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502,
    0.1406532597155259,  0.1690047266392679,  0.1903505780647854,
    0.2044329400752989,  0.2094821410847278};
constexpr double kWg[4] = {0.1294849661688697, 0.2797053914892767,
                           0.3818300505051189, 0.4179591836734694};

struct PanelResult {
  double kronrod;
  double err;  // |kronrod - gauss|, a (typically very pessimistic) bound
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(mid);
  double kron = kWgk[7] * fc;
  double gauss = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double fsum = f(mid - dx) + f(mid + dx);
    kron += kWgk[j] * fsum;
    if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
  }
  kron *= half;
  gauss *= half;
  return {kron, std::fabs(kron - gauss)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol, int max_intervals) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(abs_tol > 0.0)) {
    throw DomainError("integrate: requires finite limits and abs_tol > 0");
  }
  if (a == b) return {0.0, 0.0, 0};

  struct Interval {
    double a, b;
    PanelResult p;
  };
  const double total_len = std::fabs(b - a);
  std::vector<Interval> work{{a, b, gk15(f, a, b)}};
  QuadratureResult out;

  int splits = 0;
  while (!work.empty()) {
    Interval cur = work.back();
    work.pop_back();
    const double local_tol = abs_tol * (std::fabs(cur.b - cur.a) / total_len);
    if (cur.p.err <= local_tol) {
      out.value += cur.p.kronrod;
      out.abs_error += cur.p.err;
      ++out.intervals;
      continue;
    }
    if (++splits > max_intervals) {
      throw OracleError(
          "integrate: subdivision budget exhausted before reaching the "
          "requested tolerance");
    }
    const double mid = 0.5 * (cur.a + cur.b);
    work.push_back({cur.a, mid, gk15(f, cur.a, mid)});
    work.push_back({mid, cur.b, gk15(f, mid, cur.b)});
  }
  if (!std::isfinite(out.value)) {
    throw OracleError("integrate: integrand produced a non-finite value");
  }
  return out;
}

}  // namespace censreg
