#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>

#include "omnipred/core.h"

namespace omnipred {

// Seeded generator. Split() derives independent child streams so trials can
// run in parallel without sharing state.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  Rng Split(std::uint64_t stream) const;

  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  double Uniform();  // [0, 1)
  double Normal();
  std::size_t UniformIndex(std::size_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Draws i with probability dist[i]. Negatives down to -1e-12 are treated as
// zero; the mass must be 1 within 1e-9.
std::size_t SampleIndex(std::span<const double> dist, Rng& rng);
std::size_t SampleIndex(const MixedAction& dist, Rng& rng);

}  // namespace omnipred
