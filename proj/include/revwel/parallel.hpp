#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace revwel {

/// Samples per work unit. Results depend on it, so it is fixed.
constexpr std::uint64_t kChunkSize = 4096;

/// Worker count: REVWEL_THREADS if set, else the hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("REVWEL_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

/// Runs `chunk(begin, end)` over [0, n_samples) in fixed-size chunks and
/// merges the partial accumulators in chunk order, so the result is the same
/// for any number of workers.
template <class Acc, class ChunkFn>
Acc reduce_chunks(std::uint64_t n_samples, ChunkFn&& chunk) {
  const std::uint64_t n_chunks = (n_samples + kChunkSize - 1) / kChunkSize;
  std::vector<Acc> parts(n_chunks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        const std::uint64_t b = c * kChunkSize;
        parts[c] = chunk(b, std::min(n_samples, b + kChunkSize));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n_chunks);
      }
    }
  };

  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(worker_count(), n_chunks));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);

  Acc total{};
  for (const Acc& p : parts) total.merge(p);
  return total;
}

}  // namespace revwel
