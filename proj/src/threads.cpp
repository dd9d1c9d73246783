#include "astro/threads.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace astro {

namespace {

int default_threads() {
  if (const char* env = std::getenv("ASTRODECONV_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

std::atomic<int> g_max_threads{0};  // 0 = not yet resolved

}  // namespace

int max_threads() {
  int n = g_max_threads.load(std::memory_order_relaxed);
  if (n == 0) {
    n = default_threads();
    g_max_threads.store(n, std::memory_order_relaxed);
  }
  return n;
}

void set_max_threads(int n) { g_max_threads.store(std::max(1, n), std::memory_order_relaxed); }

void parallel_chunks(int64_t n, const std::function<void(int64_t, int64_t)>& body) {
  if (n <= 0) return;
  int workers = static_cast<int>(std::min<int64_t>(max_threads(), n));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  int64_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) {
    int64_t lo = w * chunk;
    int64_t hi = std::min<int64_t>(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  body(0, std::min<int64_t>(n, chunk));
  for (auto& t : pool) t.join();
}

void parallel_for(int64_t n, const std::function<void(int64_t)>& body) {
  parallel_chunks(n, [&body](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; ++i) body(i);
  });
}

}  // namespace astro
