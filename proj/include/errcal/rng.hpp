#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace errcal {

// Seeding scheme identifier. Any change to the generator, the stream
// derivation, or the variate recipes below is a new scheme version, because
// downstream outputs are promised to be reproducible per scheme.
inline constexpr const char* kRngScheme = "errcal-xoshiro256pp-v1";

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// xoshiro256++ with splitmix64 seed expansion. Distinct logical streams are
// derived by folding a path of tags into the base seed, so that replicate r,
// its measurement errors, and its bootstrap draws each get an independent
// stream regardless of thread scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = detail::splitmix64(s);
  }

  static std::uint64_t derive(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = base;
    std::uint64_t out = detail::splitmix64(s);
    for (std::uint64_t tag : path) {
      s = out ^ (tag + 0x9E3779B97F4A7C15ULL);
      out = detail::splitmix64(s);
      s = out;
      out = detail::splitmix64(s);
    }
    return out;
  }

  static Rng stream(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    return Rng(derive(base, path));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform on the open interval (0,1); never returns an endpoint, so it is
  // safe under a logarithm.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal via Box–Muller; the paired variate is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(angle);
    has_cached_ = true;
    return r * std::cos(angle);
  }

  // Unbiased integer in [0, n) (Lemire's multiply-shift with rejection).
  std::uint64_t uniform_below(std::uint64_t n) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0ULL - n) % n;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::array<std::uint64_t, 4> state_{};
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Fixed tags naming the logical substreams of one simulated replicate.
namespace stream_tag {
inline constexpr std::uint64_t truth = 1;  // (X, Z) and the outcome noise
inline constexpr std::uint64_t meas = 2;   // measurement-error draws
inline constexpr std::uint64_t bio = 3;    // biomarker-error draws
inline constexpr std::uint64_t boot = 4;   // bootstrap resampling
}  // namespace stream_tag

}  // namespace errcal
