#pragma once

#include <cstdint>

namespace telecert {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t v, int k) {
  return (v << k) | (v >> (64 - k));
}

}  // namespace detail

/// Deterministic xoshiro256++ stream. Equal (seed, stream) pairs produce the
/// same sequence on every platform; derive() splits off independent
/// substreams so parallel workers never share state.
class RngState {
 public:
  explicit RngState(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {
    std::uint64_t x = seed;
    x ^= detail::splitmix64(stream) * 0x9E3779B97F4A7C15ull;
    std::uint64_t init = x;
    for (auto& w : s_) w = detail::splitmix64(init);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::uint64_t next() {
    const std::uint64_t result = detail::rotl64(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl64(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Independent substream; deterministic in (seed, stream, stream_id).
  RngState derive(std::uint64_t stream_id) const {
    std::uint64_t h = stream_ * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull;
    h ^= stream_id + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    return RngState(seed_, detail::splitmix64(h));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace telecert
