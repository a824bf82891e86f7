#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace geocorpus {

// Runs fn(chunk_index, begin, end) over [0,n) split into fixed-size chunks.
// The chunk grid depends only on n and chunk_size, never on the worker count,
// so per-chunk outputs merged in chunk order are deterministic for any number
// of workers. Threads claim chunks via an atomic cursor.
inline void parallel_chunks(std::size_t n, std::size_t workers, std::size_t chunk_size,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
  if (workers <= 1 || n_chunks == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      const std::size_t b = c * chunk_size;
      const std::size_t e = std::min(n, b + chunk_size);
      fn(c, b, e);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      const std::size_t b = c * chunk_size;
      const std::size_t e = std::min(n, b + chunk_size);
      fn(c, b, e);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
  if (n == 0) return 0;
  if (chunk_size == 0) chunk_size = 1;
  return (n + chunk_size - 1) / chunk_size;
}

// Deterministic parallel map: out[i] = fn(i). Output order is input order
// regardless of scheduling.
template <typename T>
std::vector<T> parallel_map(std::size_t n, std::size_t workers, std::size_t chunk_size,
                            const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  parallel_chunks(n, workers, chunk_size, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = fn(i);
  });
  return out;
}

}  // namespace geocorpus
