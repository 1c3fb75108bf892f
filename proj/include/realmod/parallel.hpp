#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace realmod {

/// Runs fn(k) for k in [0, n) on `threads` workers (0: hardware concurrency).
/// Each index runs exactly once; callers write results by index.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) fn(k);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace realmod
