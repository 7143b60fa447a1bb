#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "saddle/linalg.hpp"

namespace saddle {

/// SplitMix64 generator. Fixed output on every platform, which the
/// per-trial streams rely on for reproducible reports.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

/// Independent stream for (seed, index): the index is mixed through one
/// SplitMix round so neighbouring indices start far apart.
inline SplitMix64 stream_for(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
  return SplitMix64(mixer());
}

inline Vector uniform_in_box(SplitMix64& rng, const Box& box) {
  if (!box.bounded()) throw ContractViolation("uniform_in_box: box must be bounded");
  Vector x(static_cast<Eigen::Index>(box.dimension()));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(box.lower()[i], box.upper()[i]);
  return x;
}

// Uniform in the Euclidean ball of the given radius around center.
inline Vector uniform_in_ball(SplitMix64& rng, const Vector& center, double radius) {
  const auto d = center.size();
  Vector dir(d);
  double n = 0.0;
  do {
    for (Eigen::Index i = 0; i < d; ++i) dir[i] = rng.normal();
    n = dir.norm();
  } while (n == 0.0);
  const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  return center + (r / n) * dir;
}

}  // namespace saddle
