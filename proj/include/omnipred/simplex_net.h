#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "omnipred/core.h"

namespace omnipred {

struct NetOptions {
  std::size_t max_points = 250000;
};

// Lattice {m / n : m in Z^k_{>=0}, sum m = n} with 1/n <= eps / (2(k-1)).
// Points are enumerated in colexicographic order of m, so for k = 2 index j
// is (1 - j/n, j/n): the binary grid in ascending P(class 1).
class SimplexNet {
 public:
  std::size_t k() const { return k_; }
  double eps() const { return eps_; }
  std::size_t resolution() const { return n_; }
  double step() const { return 1.0 / static_cast<double>(n_); }
  std::size_t size() const { return size_; }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * k_, k_};
  }
  std::vector<int> lattice(std::size_t i) const;
  std::optional<std::size_t> IndexOf(std::span<const int> lattice) const;
  std::size_t VertexIndex(std::size_t i) const;

 private:
  friend SimplexNet BuildSimplexNet(std::size_t, double, const NetOptions&);
  std::size_t k_ = 0;
  std::size_t n_ = 0;
  std::size_t size_ = 0;
  double eps_ = 0.0;
  std::vector<double> coords_;
};

// Number of lattice points, C(n + k - 1, k - 1). Saturates at SIZE_MAX.
std::size_t LatticeCount(std::size_t k, std::size_t n);

SimplexNet BuildSimplexNet(std::size_t k, double eps,
                           const NetOptions& options = {});

// Closest net point in l1; lowest index on ties.
std::size_t Nearest(const SimplexNet& net, std::span<const double> p);

// For k = 2 nets: P(class 1) at each index, ascending.
std::vector<double> BinaryGridValues(const SimplexNet& net);

}  // namespace omnipred
