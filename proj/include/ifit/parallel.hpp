#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ifit {

// Resolves a user thread request: 0 means "all hardware threads".
inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs fn(i) for i in [0, count) on up to `threads` workers with static,
// contiguous chunking. Each index is processed exactly once, so results
// written to slot i are independent of scheduling. If several indices
// throw, the exception from the lowest index is rethrown.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(resolve_threads(threads),
                                            static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::size_t> error_index(threads, count);
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(count, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, t, begin, end] {
        for (std::size_t i = begin; i < end; ++i) {
          try {
            fn(i);
          } catch (...) {
            errors[t] = std::current_exception();
            error_index[t] = i;
            return;
          }
        }
      });
    }
  }
  std::size_t best = count;
  std::exception_ptr first;
  for (unsigned t = 0; t < threads; ++t) {
    if (errors[t] && error_index[t] < best) {
      best = error_index[t];
      first = errors[t];
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace ifit
