#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace pgen {

// Process-wide worker count used by the batch and CTU loops. 1 keeps every
// reduction in a fixed sequential order.
inline int& thread_count() {
  static int count = 1;
  return count;
}

inline void set_thread_count(int n) { thread_count() = std::max(1, n); }

// Runs body(begin, end, worker) over contiguous chunks of [0, n). Chunk
// boundaries depend only on n and the worker count, so per-worker partial
// results can be merged deterministically by worker index.
template <typename Body>
void parallel_chunks(std::size_t n, int workers, Body&& body) {
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), std::max<std::size_t>(n, 1));
  if (w <= 1) {
    body(std::size_t{0}, n, 0);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(w);
  const std::size_t step = (n + w - 1) / w;
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t begin = std::min(n, t * step);
    const std::size_t end = std::min(n, begin + step);
    threads.emplace_back([&, begin, end, t] {
      try {
        body(begin, end, static_cast<int>(t));
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  parallel_chunks(n, thread_count(), [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t i = begin; i < end; ++i) body(i);
  });
}

}  // namespace pgen
