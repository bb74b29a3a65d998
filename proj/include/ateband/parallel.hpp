#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace ateband {

// Runs fn(job) for job in [0, n_jobs). Each job writes only its own output
// slot and draws from its own RNG stream, so the result is identical for any
// thread count.
inline void parallel_for(int n_jobs, int n_threads,
                         const std::function<void(int)>& fn) {
  if (n_threads <= 1 || n_jobs <= 1) {
    for (int j = 0; j < n_jobs; ++j) fn(j);
    return;
  }
  std::vector<std::thread> workers;
  const int t_count = std::min(n_threads, n_jobs);
  workers.reserve(t_count);
  for (int t = 0; t < t_count; ++t)
    workers.emplace_back([&, t] {
      for (int j = t; j < n_jobs; j += t_count) fn(j);
    });
  for (auto& w : workers) w.join();
}

}  // namespace ateband
