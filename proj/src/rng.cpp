#include "censreg/rng.hpp"

#include <cmath>

#include "censreg/special_fn.hpp"

namespace censreg {

double Rng::next_normal() { return std_normal_quantile(next_uniform()); }

double Rng::next_normal_above(double a) {
  // P(Z > z | Z > a) = u  <=>  S(z) = u * S(a).
  return upper_quantile_log(std::log(next_uniform()) + log_survival(a));
}

}  // namespace censreg
