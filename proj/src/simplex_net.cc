#include "omnipred/simplex_net.h"

#include <cmath>
#include <limits>
#include <string>

namespace omnipred {
namespace {

// Compositions of r into `parts` nonnegative parts.
std::size_t Compositions(std::size_t r, std::size_t parts) {
  return LatticeCount(parts, r);
}

}  // namespace

std::size_t LatticeCount(std::size_t k, std::size_t n) {
  // C(n + k - 1, k - 1), multiplicative form with overflow saturation.
  const std::size_t kMax = std::numeric_limits<std::size_t>::max();
  std::size_t r = k - 1;
  std::size_t result = 1;
  for (std::size_t i = 1; i <= r; ++i) {
    std::size_t num = n + i;
    if (result > kMax / num) return kMax;
    result = result * num / i;  // exact: result * num is divisible by i
  }
  return result;
}

std::vector<int> SimplexNet::lattice(std::size_t i) const {
  std::vector<int> m(k_);
  auto p = point(i);
  for (std::size_t j = 0; j < k_; ++j) {
    m[j] = static_cast<int>(std::lround(p[j] * static_cast<double>(n_)));
  }
  return m;
}

std::optional<std::size_t> SimplexNet::IndexOf(
    std::span<const int> lattice) const {
  if (lattice.size() != k_) return std::nullopt;
  long total = 0;
  for (int v : lattice) {
    if (v < 0) return std::nullopt;
    total += v;
  }
  if (total != static_cast<long>(n_)) return std::nullopt;
  // Colex rank: outermost loop runs over the last coordinate.
  std::size_t rank = 0;
  std::size_t remaining = n_;
  for (std::size_t c = k_ - 1; c >= 1; --c) {
    std::size_t mc = static_cast<std::size_t>(lattice[c]);
    for (std::size_t v = 0; v < mc; ++v) rank += Compositions(remaining - v, c);
    remaining -= mc;
  }
  return rank;
}

std::size_t SimplexNet::VertexIndex(std::size_t i) const {
  std::vector<int> m(k_, 0);
  m[i] = static_cast<int>(n_);
  return *IndexOf(m);
}

SimplexNet BuildSimplexNet(std::size_t k, double eps,
                           const NetOptions& options) {
  if (k < 2) throw ConfigError("net needs k >= 2");
  if (!(eps > 0.0) || eps > 1.0) {
    throw ConfigError("net radius must lie in (0, 1]");
  }
  const double target = eps / (2.0 * static_cast<double>(k - 1));
  const auto n = static_cast<std::size_t>(std::ceil(1.0 / target - 1e-9));
  const std::size_t count = LatticeCount(k, n);
  if (count > options.max_points) {
    throw ConfigError("net with k=" + std::to_string(k) + ", eps=" +
                      std::to_string(eps) + " would have " +
                      std::to_string(count) + " points, cap is " +
                      std::to_string(options.max_points));
  }
  SimplexNet net;
  net.k_ = k;
  net.n_ = n;
  net.eps_ = eps;
  net.size_ = count;
  net.coords_.reserve(count * k);

  std::vector<std::size_t> m(k, 0);
  const double inv = 1.0 / static_cast<double>(n);
  // Iterate m_{k-1} outermost, m_0 determined by the remainder.
  auto emit = [&](auto&& self, std::size_t c, std::size_t remaining) -> void {
    if (c == 0) {
      m[0] = remaining;
      for (std::size_t j = 0; j < k; ++j) {
        net.coords_.push_back(static_cast<double>(m[j]) * inv);
      }
      return;
    }
    for (std::size_t v = 0; v <= remaining; ++v) {
      m[c] = v;
      self(self, c - 1, remaining - v);
    }
  };
  emit(emit, k - 1, n);
  return net;
}

std::size_t Nearest(const SimplexNet& net, std::span<const double> p) {
  if (p.size() != net.k()) throw ConfigError("dimension mismatch in Nearest");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < net.size(); ++i) {
    double d = L1Distance(net.point(i), p);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<double> BinaryGridValues(const SimplexNet& net) {
  if (net.k() != 2) throw ConfigError("binary grid needs a k = 2 net");
  std::vector<double> v(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) v[i] = net.point(i)[1];
  return v;
}

}  // namespace omnipred
