#include "omnipred/rng.h"

#include <cmath>

namespace omnipred {
namespace {

std::mt19937_64 SeededEngine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(SeededEngine(seed)) {}

Rng Rng::Split(std::uint64_t stream) const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed_),
                    static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x5eedu};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return Rng((static_cast<std::uint64_t>(out[1]) << 32) | out[0]);
}

double Rng::Uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

double Rng::Normal() { return std::normal_distribution<double>()(engine_); }

std::size_t Rng::UniformIndex(std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

std::size_t SampleIndex(std::span<const double> dist, Rng& rng) {
  double total = CheckDistribution(dist);
  double u = rng.Uniform() * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0.0) continue;
    last = i;
    u -= dist[i];
    if (u < 0.0) return i;
  }
  return last;
}

std::size_t SampleIndex(const MixedAction& dist, Rng& rng) {
  std::vector<double> w;
  w.reserve(dist.size());
  for (const auto& e : dist) w.push_back(e.weight);
  return dist[SampleIndex(std::span<const double>(w), rng)].index;
}

}  // namespace omnipred
