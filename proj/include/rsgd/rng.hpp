#pragma once

#include <cmath>
#include <cstdint>

namespace rsgd {

/// SplitMix64 finalizer. Used both for seeding and as a stream-id mixer.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/**
 * Deterministic pseudo-random stream (xoshiro256++).
 *
 * Every source of randomness in the library flows through streams derived
 * from a single master seed via RngStream::derive(master, stream_id), so
 * Monte Carlo aggregates are reproducible and order-independent regardless
 * of how runs are scheduled across threads.
 */
class RngStream {
 public:
  RngStream() : RngStream(0x853C49E6748FEA9Bull) {}

  explicit RngStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
    // xoshiro forbids the all-zero state.
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
      state_[0] = 0x9E3779B97F4A7C15ull;
    }
  }

  /// Independent stream for run `stream_id` under `master_seed`.
  static RngStream derive(std::uint64_t master_seed, std::uint64_t stream_id) {
    std::uint64_t sm = master_seed;
    const std::uint64_t a = splitmix64(sm);
    std::uint64_t sid = stream_id + 0x632BE59BD9B4E019ull;
    const std::uint64_t b = splitmix64(sid);
    return RngStream(a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2)));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [a, b).
  double uniform(double a, double b) { return a + next_double() * (b - a); }

  /// Uniform integer in [0, n). Requires n > 0.
  std::int64_t uniform_int(std::int64_t n) {
    return static_cast<std::int64_t>(
        (static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n)) >> 64);
  }

  /// Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double gaussian() {
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

/// FNV-1a over raw bytes; used to fingerprint observation streams and files.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xCBF29CE484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace rsgd
