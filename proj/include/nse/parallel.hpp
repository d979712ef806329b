#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace nse {

// Global worker cap set by the CLI --threads flag; 0 means hardware default.
inline int& thread_cap() {
  static int cap = 0;
  return cap;
}

inline int effective_threads(std::size_t n_items) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  int cap = thread_cap() > 0 ? thread_cap() : static_cast<int>(hw);
  return static_cast<int>(std::min<std::size_t>(cap, std::max<std::size_t>(n_items, 1)));
}

// Runs fn(i) for i in [0, n). Each index must write only its own output slot,
// which makes the result independent of the schedule and the thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const int workers = effective_threads(n);
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace nse
