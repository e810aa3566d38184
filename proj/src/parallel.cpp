#include "kp2fpu/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace kp2fpu {

namespace {
std::atomic<int> g_threads{0};

int resolve(int requested) {
  if (requested > 0) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return std::clamp<int>(static_cast<int>(hc == 0 ? 1 : hc), 1, 8);
}
}  // namespace

void set_num_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

int num_threads() { return resolve(g_threads.load()); }

void parallel_for(long begin, long end, const std::function<void(long, long)>& block) {
  const long n = end - begin;
  if (n <= 0) return;
  const int workers = std::min<long>(num_threads(), n);
  if (workers <= 1) {
    block(begin, end);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const long chunk = (n + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    const long lo = begin + w * chunk;
    const long hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&block, lo, hi] { block(lo, hi); });
  }
  block(begin, std::min(end, begin + chunk));
  for (auto& t : pool) t.join();
}

}  // namespace kp2fpu
