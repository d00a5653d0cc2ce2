#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qrisk {

// Runs fn(i) for i in [0, total) across `workers` threads. Tasks write to
// disjoint slots, so results do not depend on the worker count.
inline void parallel_for(std::size_t total, std::size_t workers,
                         const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || total <= 1) {
    for (std::size_t i = 0; i < total; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const std::size_t count = std::min(workers, total);
  for (std::size_t w = 0; w < count; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < total; i += count) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace qrisk
