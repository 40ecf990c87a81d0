#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "namdkit/analysis/series.hpp"

namespace namdkit::analysis::detail {

inline unsigned resolve_threads(Parallelism p, std::size_t work) {
  unsigned t = p.threads ? p.threads : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(work, 1)));
}

/// Calls fn(i) for i in [0, n), split into contiguous blocks across threads.
/// fn must only write to per-index output slots. The first exception thrown
/// by the lowest failing index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, Parallelism p, Fn&& fn) {
  const unsigned threads = resolve_threads(p, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t block = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t begin = t * block;
      const std::size_t end = std::min(n, begin + block);
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace namdkit::analysis::detail
