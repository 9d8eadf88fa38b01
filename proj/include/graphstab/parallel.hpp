#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace gs {

// Runs fn(i) for i in [0, count) across at most `threads` workers. Each
// index computes independently and writes into its own slot, so the result
// of a parallel map is identical for every thread count; reductions over
// the produced vector must then be done in index order (or pairwise_sum).
//
// Exceptions thrown by fn are captured and rethrown on the calling thread.
inline void parallel_for(int count, int threads,
                         const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int workers = std::min(std::max(threads, 1), count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

template <typename T>
std::vector<T> parallel_map(int count, int threads,
                            const std::function<T(int)>& fn) {
  std::vector<T> out(static_cast<size_t>(count));
  parallel_for(count, threads,
               [&](int i) { out[static_cast<size_t>(i)] = fn(i); });
  return out;
}

}  // namespace gs
