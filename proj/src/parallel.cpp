// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#include "pforge/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace pforge {

int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("PORTRAIT_FORGE_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

namespace {
thread_local bool tl_inside_parallel = false;
}

void parallel_chunks(int count, const std::function<void(int, int)>& fn,
                     int max_workers) {
  if (count <= 0) return;
  int workers = worker_count();
  if (max_workers > 0) workers = std::min(workers, max_workers);
  workers = std::min(workers, count);
  // Nested calls run inline; the outer level owns the thread budget.
  if (workers <= 1 || tl_inside_parallel) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const int chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(count, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&fn, begin, end] {
      tl_inside_parallel = true;
      fn(begin, end);
    });
  }
  for (auto& t : threads) t.join();
}

}  // namespace pforge
