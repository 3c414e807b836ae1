// SPDX-License-Identifier: MIT
#include "fsda/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace fsda {

int max_threads() {
  static const int cached = [] {
    const char* env = std::getenv("FSDA_THREADS");
    if (!env) return 1;
    const int parsed = std::atoi(env);
    if (parsed < 1) return 1;
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    return std::min(parsed, std::max(hw, 1));
  }();
  return cached;
}

void parallel_for(int begin, int end,
                  const std::function<void(int, int)>& chunk_fn) {
  const int count = end - begin;
  if (count <= 0) return;
  const int threads = std::min(max_threads(), count);
  // Not worth spawning threads for tiny ranges.
  if (threads == 1 || count < 64) {
    chunk_fn(begin, end);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const int chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = begin + t * chunk;
    const int hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(chunk_fn, lo, hi);
  }
  for (auto& th : pool) th.join();
}

}  // namespace fsda
