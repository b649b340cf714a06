// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace pgvoc {

namespace detail {
inline std::size_t& thread_count_slot() {
  thread_local std::size_t count = 1;
  return count;
}
}  // namespace detail

/// Worker count used by frame-parallel loops started from the calling thread.
/// Worker threads themselves always run their share sequentially.
inline void set_thread_count(std::size_t n) { detail::thread_count_slot() = std::max<std::size_t>(1, n); }
inline std::size_t thread_count() { return detail::thread_count_slot(); }

/// Calls fn(i) for i in [0, count). Work is split into contiguous chunks;
/// callers must write only to slots owned by i so results never depend on the
/// worker count.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace pgvoc
