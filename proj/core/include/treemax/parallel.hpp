#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "treemax/error.hpp"

namespace treemax {

/// Calls fn(i) for i in [0, count) on up to `parallelism` threads. Each index
/// is handled by exactly one call, so writing results by index gives output
/// independent of the thread count. On failure, rethrows the error of the
/// lowest failing index, prefixed with that index.
template <class Fn>
void parallel_for(std::size_t count, unsigned parallelism, Fn&& fn) {
  const std::size_t threads =
      std::max<std::size_t>(1, std::min<std::size_t>(parallelism == 0 ? 1 : parallelism, count));

  std::mutex mutex;
  std::size_t failed_index = count;
  std::exception_ptr failure;

  auto run_chunk = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      {
        std::lock_guard lock(mutex);
        if (failed_index < i) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        return;
      }
    }
  };

  if (threads == 1) {
    run_chunk(0, count);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (count + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(count, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_chunk, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  if (!failure) return;
  const std::string where = "replica " + std::to_string(failed_index) + ": ";
  try {
    std::rethrow_exception(failure);
  } catch (const Error& e) {
    throw Error(e.code(), where + e.detail());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ReplicaFailed, where + e.what());
  }
}

}  // namespace treemax
