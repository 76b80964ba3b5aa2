#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace qmb {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detail

// Deterministic random stream with platform-independent draw semantics.
// Uniform and Gaussian variates are derived from raw engine words by fixed
// rules, so the number of engine advances per call is constant: uniform01
// and next_below consume one word, gaussian consumes two. The draw counter
// makes per-round consumption auditable.
class RngStream {
 public:
  RngStream() : engine_(0) {}
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for (seed, label); different labels decorrelate.
  static RngStream derive(std::uint64_t seed, std::string_view label) {
    return RngStream(detail::splitmix64(detail::splitmix64(seed) ^ detail::fnv1a64(label)));
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound); bound >= 1.
  std::uint64_t next_below(std::uint64_t bound) {
    ++draws_;
    return engine_() % bound;
  }

  // Standard normal via Box-Muller; always consumes exactly two words.
  double gaussian() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  std::uint64_t draw_count() const { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace qmb
