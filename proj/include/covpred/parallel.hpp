#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace covpred {

/// Worker count: COVPRED_THREADS when set, otherwise 1. Parallel sections
/// write to disjoint slots, so the count never changes results.
inline unsigned thread_count() {
  if (const char* env = std::getenv("COVPRED_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v <= 256) return static_cast<unsigned>(v);
  }
  return 1;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn fn) {
  unsigned workers = thread_count();
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = std::min<std::size_t>(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace covpred
