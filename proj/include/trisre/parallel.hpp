#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "trisre/estimate.hpp"
#include "trisre/rng.hpp"

namespace trisre {

/// Samples per RNG stream.  Work is split into chunks of this size, chunk c
/// drawing from stream (stream_base + c), so results depend only on the seed
/// and never on the worker count.
inline constexpr std::size_t kChunkSize = 4096;

/// Worker count: explicit value if positive, else TRISRE_WORKERS, else the
/// hardware concurrency.
unsigned resolve_workers(unsigned requested = 0);

/// Runs body(chunk_index) for every chunk on up to `workers` threads.  The
/// first exception thrown by any chunk is rethrown after all threads join.
template <typename Body>
void parallel_chunks(std::size_t n_chunks, unsigned workers, Body&& body) {
  workers = std::max(1u, std::min<unsigned>(resolve_workers(workers),
                                            static_cast<unsigned>(std::max<std::size_t>(n_chunks, 1))));
  if (workers == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= n_chunks) return;
        try {
          body(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(n_chunks);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Fills `out` (pre-sized) with gen(rng) using the chunked stream layout.
template <typename T, typename Gen>
void parallel_generate(std::vector<T>& out, std::uint64_t seed, std::uint64_t stream_base,
                       unsigned workers, Gen&& gen) {
  const std::size_t n = out.size();
  const std::size_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
  parallel_chunks(n_chunks, workers, [&](std::size_t c) {
    RngStream rng(seed, stream_base + c);
    const std::size_t end = std::min(n, (c + 1) * kChunkSize);
    for (std::size_t i = c * kChunkSize; i < end; ++i) out[i] = gen(rng);
  });
}

/// Mean and standard error of K per-sample statistics.  `eval(rng, values)`
/// writes one sample of each statistic into values[0..K).  Per-chunk partial
/// sums are merged in chunk order, so the result is bit-reproducible.
template <std::size_t K, typename Eval>
std::array<RunningStats, K> parallel_mean(std::uint64_t n_samples, std::uint64_t seed,
                                          std::uint64_t stream_base, unsigned workers,
                                          Eval&& eval) {
  const std::size_t n_chunks =
      static_cast<std::size_t>((n_samples + kChunkSize - 1) / kChunkSize);
  std::vector<std::array<RunningStats, K>> partial(n_chunks);
  parallel_chunks(n_chunks, workers, [&](std::size_t c) {
    RngStream rng(seed, stream_base + c);
    const std::uint64_t end = std::min<std::uint64_t>(n_samples, (c + 1) * kChunkSize);
    std::array<double, K> values{};
    auto& stats = partial[c];
    for (std::uint64_t i = c * kChunkSize; i < end; ++i) {
      eval(rng, values);
      for (std::size_t k = 0; k < K; ++k) stats[k].add(values[k]);
    }
  });
  std::array<RunningStats, K> total{};
  for (const auto& p : partial)
    for (std::size_t k = 0; k < K; ++k) total[k].merge(p[k]);
  return total;
}

}  // namespace trisre
