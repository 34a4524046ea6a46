#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace hodgelab {

/// Worker cap: HODGE_LAB_THREADS if set, else hardware concurrency.
inline int thread_budget() {
  if (const char* env = std::getenv("HODGE_LAB_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Run f(i) for i in [0, n) on up to thread_budget() threads. Results must be
/// written to preallocated slots so the merge is deterministic.
template <class F>
void parallel_for(int n, F&& f) {
  int workers = std::min(thread_budget(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<int> next{0};
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) break;
        f(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace hodgelab
