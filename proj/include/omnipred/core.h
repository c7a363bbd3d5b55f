#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace omnipred {

// A learner, oracle or solver broke the contract its guarantee depends on.
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or argument at an API boundary.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// sign(0) = 1 everywhere in this library.
inline double Sign(double v) { return v >= 0.0 ? 1.0 : -1.0; }

inline constexpr double kSimplexTol = 1e-12;

// Probability vector in the k-simplex, k >= 2.
class SimplexPoint {
 public:
  // Accepts entries >= -1e-12 summing to 1 within 1e-9; clips and
  // renormalizes so the stored coordinates sum to 1 within 1e-12.
  explicit SimplexPoint(std::vector<double> coords);

  static SimplexPoint Vertex(std::size_t k, std::size_t i);
  static SimplexPoint Uniform(std::size_t k);

  std::size_t dim() const { return coords_.size(); }
  std::span<const double> coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }

 private:
  std::vector<double> coords_;
};

double L1Distance(std::span<const double> a, std::span<const double> b);

// Sparse distribution over a finite action set (usually net indices).
struct WeightedIndex {
  std::size_t index;
  double weight;
};
using MixedAction = std::vector<WeightedIndex>;

MixedAction PointMass(std::size_t index);

// One labeled example; features satisfy |x|_2 <= 1 and the label is a class
// index (for binary streams, 1 means the positive class).
struct Example {
  std::vector<double> x;
  std::size_t label = 0;
};

// Validates, clips tiny negatives and returns the total mass.
double CheckDistribution(std::span<const double> dist, double tol = 1e-9);

}  // namespace omnipred
