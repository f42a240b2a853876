#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace lilmc {

/// Worker count: LILMC_THREADS if set and positive, otherwise the hardware
/// concurrency (at least 1).
inline unsigned default_threads() {
  if (const char* env = std::getenv("LILMC_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count) on up to `threads` workers with a static
/// contiguous partition. Callers write results into per-index slots and reduce
/// them in index order afterwards, so the outcome never depends on `threads`.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = count * w / workers;
      const std::size_t end = count * (w + 1) / workers;
      pool.emplace_back([&, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

/// Pairwise (cascade) sum in index order; deterministic and with O(log n)
/// error growth.
template <class It>
double pairwise_sum(It first, It last) {
  const auto n = static_cast<std::size_t>(last - first);
  if (n <= 8) {
    double s = 0.0;
    for (; first != last; ++first) s += *first;
    return s;
  }
  const It mid = first + static_cast<std::ptrdiff_t>(n / 2);
  return pairwise_sum(first, mid) + pairwise_sum(mid, last);
}

template <class Range>
double pairwise_sum(const Range& r) {
  return pairwise_sum(std::begin(r), std::end(r));
}

}  // namespace lilmc
