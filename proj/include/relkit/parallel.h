#ifndef RELKIT_PARALLEL_H_
#define RELKIT_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace relkit {

// Runs fn(n) for every n in [0, count) on up to `threads` workers. Callers
// write results into per-index slots and reduce them afterwards in index
// order, which keeps every sum independent of the worker count.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn &&fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t n = 0; n < count; ++n) fn(n);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t n = next++; n < count; n = next++) {
          try {
            fn(n);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace relkit

#endif  // RELKIT_PARALLEL_H_
