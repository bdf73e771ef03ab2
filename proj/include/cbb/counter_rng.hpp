#pragma once

// Counter-based random numbers. Every draw is a pure function of a 64-bit key
// and a counter, so streams can be addressed lazily (per column, per step,
// per action) and replayed bit-for-bit on any platform.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace cbb::rng {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive a key from a seed and any number of integer coordinates.
template <typename... Parts>
constexpr std::uint64_t derive(std::uint64_t seed, Parts... parts) noexcept {
  std::uint64_t h = mix64(seed);
  ((h = mix64(h ^ mix64(static_cast<std::uint64_t>(parts) + 0x632be59bd9b4e019ULL))), ...);
  return h;
}

/// FNV-1a, used to turn labels (policy names, stream tags) into key parts.
constexpr std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : label) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by multiply-shift.
constexpr std::uint64_t to_range(std::uint64_t bits, std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits) * n) >> 64);
}

/// Standard normal via Box-Muller from two independent words.
inline double to_normal(std::uint64_t a, std::uint64_t b) noexcept {
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = to_unit(b);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential view over a keyed counter stream.
class Stream {
 public:
  explicit Stream(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next() noexcept { return mix64(key_ ^ mix64(counter_++)); }
  double uniform() noexcept { return to_unit(next()); }
  std::uint64_t below(std::uint64_t n) noexcept { return to_range(next(), n); }
  double normal() noexcept {
    const std::uint64_t a = next();
    return to_normal(a, next());
  }
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cbb::rng
