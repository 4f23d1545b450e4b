#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "covnet/types.hpp"

namespace covnet {

// PCG32 (O'Neill's pcg32: 64-bit LCG state, xorshift-rotate output).
// Bit-reproducible across platforms, unlike the std distributions, which is
// why normal/uniform sampling is implemented here rather than in <random>.
// Every stochastic operation in the library takes a Pcg32 explicitly; a copy
// of the generator replays the exact same stream.
class Pcg32 {
 public:
  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(0), inc_((stream << 1u) | 1u) {
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    std::uint64_t hi = next_u32();
    std::uint64_t bits = (hi << 32) | next_u32();
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Unbiased integer in [0, bound) by rejection.
  std::uint32_t uniform_int(std::uint32_t bound) {
    require(bound >= 1, "uniform_int: bound must be >= 1");
    std::uint32_t threshold = (-bound) % bound;
    for (;;) {
      std::uint32_t r = next_u32();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via Box-Muller; the spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - next_double();  // (0, 1]
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_int(static_cast<std::uint32_t>(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace covnet
