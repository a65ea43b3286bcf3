#pragma once

#include <cstdint>

namespace censreg {

// SplitMix64 generator. Chosen because the whole point of its finalizer is to
// decorrelate nearby seeds, so per-replication streams can be derived as
// seed ^ stream_index and consumed independently (replications never share a
// sequence, results do not depend on thread scheduling). Normal draws go
// through the inverse CDF, so one uniform in means one deterministic draw out.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng stream(std::uint64_t seed, std::uint64_t stream_index) {
    return Rng(seed ^ stream_index);
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0,1); never returns an endpoint.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal via the quantile function.
  double next_normal();

  // Standard normal conditioned on Z > a. Exact for any finite a: the target
  // tail log probability is log(u) + log_survival(a), inverted in log space,
  // so even a = 37 (tail mass ~1e-300) samples correctly.
  double next_normal_above(double a);

 private:
  std::uint64_t state_;
};

}  // namespace censreg
