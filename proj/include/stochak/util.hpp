#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace stochak {

// Worker cap for path-parallel loops. Results never depend on it: paths use
// counter-based RNG and reductions merge in block order.
void set_max_threads(int n);
int max_threads();

// Splits [0, n) into contiguous blocks and runs fn(begin, end) on each,
// using at most max_threads() workers.
void parallel_blocks(int64_t n, const std::function<void(int64_t, int64_t)>& fn);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  int64_t n = 0;
};

// Indexed sum in a fixed order, then the usual sample-mean standard error.
MeanSe mean_se(const std::vector<double>& values);

// Survival function of the standard normal.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace stochak
