#pragma once

// Deterministic parallel map: work items are claimed through an atomic
// counter and every item writes only its own preallocated slot, so results
// are identical for any thread count.

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mlg {

template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
  if (n <= 0) return;
  if (threads < 1) threads = 1;
  if (threads == 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n, std::memory_order_relaxed);  // drain remaining work
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Row-major enumeration of the upper triangle (i <= j) of an m x m grid;
// convenient for symmetric Gram fills.
inline std::pair<std::int64_t, std::int64_t> triangular_index(std::int64_t k, std::int64_t m) {
  std::int64_t i = 0;
  std::int64_t row_len = m;
  while (k >= row_len) {
    k -= row_len;
    ++i;
    --row_len;
  }
  return {i, i + k};
}

inline std::int64_t triangular_count(std::int64_t m) { return m * (m + 1) / 2; }

}  // namespace mlg
