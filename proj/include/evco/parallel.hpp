#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace evco {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Run fn(begin, end) over a fixed contiguous partition of [0, n) into
/// `threads` chunks. The partition depends only on (n, threads), so any
/// computation that is independent across items is reproducible for a
/// fixed thread count (and, when items do not interact, for any count).
inline void parallel_chunks(size_t n, int threads,
                            const std::function<void(size_t, size_t)>& fn) {
  threads = resolve_threads(threads);
  if (n == 0) return;
  const size_t n_chunks = std::min<size_t>(static_cast<size_t>(threads), n);
  if (n_chunks <= 1) {
    fn(0, n);
    return;
  }
  const size_t chunk = (n + n_chunks - 1) / n_chunks;
  std::vector<std::thread> pool;
  pool.reserve(n_chunks);
  for (size_t c = 0; c < n_chunks; ++c) {
    const size_t b = c * chunk;
    const size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace evco
