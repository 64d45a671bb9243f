#include "stochak/util.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>

namespace stochak {

namespace {
std::atomic<int> g_max_threads{1};
}

void set_max_threads(int n) {
  if (n < 1) throw std::invalid_argument("threads must be >= 1");
  g_max_threads.store(n);
}

int max_threads() { return g_max_threads.load(); }

void parallel_blocks(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
  const int workers = std::min<int64_t>(max_threads(), n);
  if (workers <= 1) {
    if (n > 0) fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  const int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int64_t b = w * chunk;
    const int64_t e = std::min<int64_t>(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

MeanSe mean_se(const std::vector<double>& values) {
  MeanSe r;
  r.n = static_cast<int64_t>(values.size());
  if (r.n == 0) return r;
  double s = 0.0;
  for (double v : values) s += v;
  r.mean = s / static_cast<double>(r.n);
  if (r.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.se = std::sqrt(ss / (static_cast<double>(r.n) * static_cast<double>(r.n - 1)));
  }
  return r;
}

}  // namespace stochak
