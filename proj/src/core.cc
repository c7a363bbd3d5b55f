#include "omnipred/core.h"

#include <cmath>
#include <numeric>
#include <string>

namespace omnipred {

double CheckDistribution(std::span<const double> dist, double tol) {
  if (dist.empty()) throw ConfigError("empty distribution");
  double total = 0.0;
  for (double v : dist) {
    if (!std::isfinite(v) || v < -kSimplexTol) {
      throw ConfigError("distribution has a negative or non-finite entry");
    }
    total += std::max(v, 0.0);
  }
  if (std::abs(total - 1.0) > tol) {
    throw ConfigError("distribution mass " + std::to_string(total) +
                      " is not 1");
  }
  return total;
}

SimplexPoint::SimplexPoint(std::vector<double> coords)
    : coords_(std::move(coords)) {
  if (coords_.size() < 2) throw ConfigError("simplex point needs k >= 2");
  double total = CheckDistribution(coords_);
  for (double& v : coords_) v = std::max(v, 0.0) / total;
}

SimplexPoint SimplexPoint::Vertex(std::size_t k, std::size_t i) {
  if (i >= k) throw ConfigError("vertex index out of range");
  std::vector<double> c(k, 0.0);
  c[i] = 1.0;
  return SimplexPoint(std::move(c));
}

SimplexPoint SimplexPoint::Uniform(std::size_t k) {
  return SimplexPoint(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

double L1Distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("dimension mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

MixedAction PointMass(std::size_t index) { return {{index, 1.0}}; }

}  // namespace omnipred
