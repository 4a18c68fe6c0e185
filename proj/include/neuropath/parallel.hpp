#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace neuropath {

namespace detail {
inline std::atomic<int>& thread_override() {
  static std::atomic<int> value{-1};
  return value;
}
}  // namespace detail

/// Worker count: set_thread_count() if called, else NEUROPATH_THREADS,
/// else hardware concurrency. 0 means auto.
inline int thread_count() {
  int n = detail::thread_override().load();
  if (n < 0) {
    n = 0;
    if (const char* env = std::getenv("NEUROPATH_THREADS")) n = std::max(0, std::atoi(env));
  }
  if (n == 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return n;
}

inline void set_thread_count(int n) { detail::thread_override().store(n); }

/// Runs fn(i) for i in [0, n) on contiguous blocks. Each index is handled
/// by exactly one worker, so results written per index are deterministic.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  const int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const int begin = static_cast<int>(static_cast<long long>(n) * w / workers);
    const int end = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    pool.emplace_back([&, begin, end] {
      try {
        for (int i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace neuropath
