// SPDX-License-Identifier: Apache-2.0

#include "bqe/threading.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace bqe {

namespace {

int resolve_default() {
  if (const char* env = std::getenv("BQE_NUM_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return std::min(n, 64);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

std::atomic<int> g_max_threads{0};

}

int max_threads() {
  int n = g_max_threads.load(std::memory_order_relaxed);
  if (n == 0) {
    n = resolve_default();
    g_max_threads.store(n, std::memory_order_relaxed);
  }
  return n;
}

void set_max_threads(int n) {
  g_max_threads.store(std::max(1, n), std::memory_order_relaxed);
}

void parallel_for(int64_t total, const std::function<void(int64_t, int64_t)>& chunk_fn) {
  if (total <= 0) return;
  int workers = std::min<int64_t>(max_threads(), total);
  if (workers <= 1 || total < 256) {
    chunk_fn(0, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  int64_t chunk = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int64_t begin = w * chunk;
    int64_t end = std::min<int64_t>(begin + chunk, total);
    if (begin >= end) break;
    pool.emplace_back([&chunk_fn, begin, end] { chunk_fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}
