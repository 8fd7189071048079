#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

#include "telecert/rng.hpp"

namespace telecert {

/// Worker count for Monte Carlo loops, bounded by TELECERT_THREADS.
inline int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  int n = std::min(hw, 8);
  if (const char* env = std::getenv("TELECERT_THREADS")) {
    const int req = std::atoi(env);
    if (req >= 1) n = std::min(req, 64);
  }
  return n;
}

struct MeanResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
};

namespace detail {

inline constexpr std::uint64_t kMcBlock = 1ull << 15;

template <class BlockFn>
void run_blocks(std::uint64_t n_blocks, BlockFn&& fn) {
  const int workers =
      static_cast<int>(std::min<std::uint64_t>(worker_count(), n_blocks));
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::uint64_t> cursor{0};
  auto drain = [&] {
    for (;;) {
      const std::uint64_t b = cursor.fetch_add(1);
      if (b >= n_blocks) return;
      fn(b);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Mean and standard error of `sample(rng)` over n draws. Samples are split
/// into fixed-size blocks with per-block derived rng streams; each block
/// accumulates Welford moments (no cancellation for near-constant streams)
/// and blocks are combined in a fixed order, so the result is identical for
/// any worker count.
template <class SampleFn>
MeanResult parallel_mean(std::uint64_t n, const RngState& base,
                         SampleFn&& sample) {
  if (n == 0) return {};
  const std::uint64_t n_blocks = (n + detail::kMcBlock - 1) / detail::kMcBlock;
  struct Moments {
    double mean = 0.0;
    double m2 = 0.0;
    std::uint64_t count = 0;
  };
  std::vector<Moments> parts(n_blocks);
  detail::run_blocks(n_blocks, [&](std::uint64_t b) {
    RngState rng = base.derive(b);
    const std::uint64_t lo = b * detail::kMcBlock;
    const std::uint64_t hi = std::min(n, lo + detail::kMcBlock);
    Moments m;
    for (std::uint64_t i = lo; i < hi; ++i) {
      const double v = sample(rng);
      ++m.count;
      const double delta = v - m.mean;
      m.mean += delta / static_cast<double>(m.count);
      m.m2 += delta * (v - m.mean);
    }
    parts[b] = m;
  });
  Moments total = parts[0];
  for (std::uint64_t b = 1; b < n_blocks; ++b) {
    const Moments& p = parts[b];
    if (p.count == 0) continue;
    const double delta = p.mean - total.mean;
    const std::uint64_t count = total.count + p.count;
    total.m2 += p.m2 + delta * delta *
                           (static_cast<double>(total.count) /
                            static_cast<double>(count)) *
                           static_cast<double>(p.count);
    total.mean += delta * static_cast<double>(p.count) /
                  static_cast<double>(count);
    total.count = count;
  }
  MeanResult r;
  r.n = total.count;
  r.mean = total.mean;
  if (total.count > 1) {
    const double var =
        std::max(0.0, total.m2 / static_cast<double>(total.count - 1));
    r.std_error = std::sqrt(var / static_cast<double>(total.count));
  }
  return r;
}

/// Integer tallies of `cell(rng)` in [0, K); exact regardless of worker count.
template <std::size_t K, class CellFn>
std::array<std::uint64_t, K> parallel_tally(std::uint64_t n,
                                            const RngState& base,
                                            CellFn&& cell) {
  std::array<std::uint64_t, K> total{};
  if (n == 0) return total;
  const std::uint64_t n_blocks = (n + detail::kMcBlock - 1) / detail::kMcBlock;
  std::vector<std::array<std::uint64_t, K>> parts(n_blocks);
  detail::run_blocks(n_blocks, [&](std::uint64_t b) {
    RngState rng = base.derive(b);
    const std::uint64_t lo = b * detail::kMcBlock;
    const std::uint64_t hi = std::min(n, lo + detail::kMcBlock);
    std::array<std::uint64_t, K> local{};
    for (std::uint64_t i = lo; i < hi; ++i) {
      const std::size_t k = cell(rng);
      ++local[k];
    }
    parts[b] = local;
  });
  for (const auto& p : parts)
    for (std::size_t k = 0; k < K; ++k) total[k] += p[k];
  return total;
}

}  // namespace telecert
