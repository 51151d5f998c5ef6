#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace pathflow {

/// Worker count from an explicit request, then PATHFLOW_THREADS, then the
/// hardware. Always at least 1.
int resolve_thread_count(int requested = 0);

/// Evaluates fn(i) for i in [0, n) on `threads` workers. Results are stored
/// by index, so the output never depends on scheduling.
template <class Fn>
auto parallel_map(std::size_t n, int threads, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(n);
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

/// Pairwise (cascade) summation; rounding error grows like log n.
double pairwise_sum(std::span<const double> values);

}  // namespace pathflow
