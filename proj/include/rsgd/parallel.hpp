#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rsgd {

/**
 * Runs fn(i) for i in [0, n) across up to n_threads workers.
 *
 * Each index owns its private random stream and writes only to its own
 * output slot, so results are identical regardless of scheduling; callers
 * aggregate in index order afterwards. n_threads <= 1 runs inline. The first
 * exception thrown by any worker is rethrown after all workers join.
 */
inline void parallel_for_index(std::int64_t n, int n_threads,
                               const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  if (n_threads <= 0) n_threads = static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads <= 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  const int workers = static_cast<int>(std::min<std::int64_t>(n_threads, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rsgd
