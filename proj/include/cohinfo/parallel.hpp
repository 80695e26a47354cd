#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace cohinfo {

/// Worker cap from COHINFO_THREADS; falls back to hardware concurrency.
inline int thread_cap_from_env() {
  const char* env = std::getenv("COHINFO_THREADS");
  if (env != nullptr) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      return 1;
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Static partition of [0, n) over at most `threads` workers. Work items
/// must be independent; results written by index are identical to a serial
/// run.
template <class Body>
void parallel_for(int n, int threads, Body&& body) {
  threads = std::clamp(threads, 1, std::max(n, 1));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&body, t, n, threads]() {
      for (int i = t; i < n; i += threads) body(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace cohinfo
