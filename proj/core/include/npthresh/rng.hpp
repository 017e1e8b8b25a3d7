#pragma once

#include <cstdint>

namespace npthresh {

// Counter-based generator keyed by (master seed, stream index).
//
// Each (seed, stream) pair yields an independent, reproducible sequence, so
// Monte Carlo replications can run in any order or in parallel without
// changing results. Normal draws use the inverse-CDF transform, which keeps
// individual streams reproducible across implementations.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double next_uniform();
  // Standard normal via normal_quantile(next_uniform()).
  double next_normal();

private:
  std::uint64_t state_;
};

}  // namespace npthresh
