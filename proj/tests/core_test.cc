#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "omnipred/core.h"
#include "omnipred/rng.h"
#include "omnipred/simplex_net.h"

using namespace omnipred;

namespace {

std::vector<double> RandomSimplex(std::size_t k, Rng& rng) {
  // Normalized exponentials are uniform on the simplex.
  std::vector<double> p(k);
  double s = 0.0;
  for (double& v : p) {
    v = -std::log(1.0 - rng.Uniform());
    s += v;
  }
  for (double& v : p) v /= s;
  return p;
}

double BruteNearestDistance(const SimplexNet& net, std::span<const double> p) {
  double best = 1e9;
  for (std::size_t i = 0; i < net.size(); ++i) {
    best = std::min(best, L1Distance(net.point(i), p));
  }
  return best;
}

std::size_t Binomial(std::size_t n, std::size_t r) {
  std::size_t b = 1;
  for (std::size_t i = 1; i <= r; ++i) b = b * (n - r + i) / i;
  return b;
}

}  // namespace

TEST_CASE("sign uses sign(0) = 1") {
  CHECK(Sign(0.0) == 1.0);
  CHECK(Sign(-1e-300) == -1.0);
  CHECK(Sign(3.0) == 1.0);
}

TEST_CASE("simplex point validation and renormalization") {
  SimplexPoint p({0.25, 0.75 + 1e-10});
  double s = p[0] + p[1];
  CHECK(std::abs(s - 1.0) <= 1e-12);
  CHECK_THROWS_AS(SimplexPoint({0.5, 0.6}), ConfigError);
  CHECK_THROWS_AS(SimplexPoint({1.1, -0.1}), ConfigError);
  CHECK_THROWS_AS(SimplexPoint({1.0}), ConfigError);
  SimplexPoint clipped({1.0 + 1e-13, -1e-13});
  CHECK(clipped[1] == 0.0);
}

TEST_CASE("binary net with eps 0.5 is the five point grid") {
  SimplexNet net = BuildSimplexNet(2, 0.5);
  REQUIRE(net.size() == 5);
  CHECK(net.step() == doctest::Approx(0.25));
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(net.point(j)[1] == doctest::Approx(0.25 * j));
    CHECK(net.point(j)[0] == doctest::Approx(1.0 - 0.25 * j));
  }
  Rng rng(1);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    double x = rng.Uniform();
    std::vector<double> p{1 - x, x};
    worst = std::max(worst, BruteNearestDistance(net, p));
  }
  CHECK(worst <= 0.25 + 1e-12);
}

TEST_CASE("net radius outside (0, 1] is rejected") {
  CHECK_THROWS_AS(BuildSimplexNet(3, 2.0), ConfigError);
  CHECK_THROWS_AS(BuildSimplexNet(3, 0.0), ConfigError);
  CHECK_THROWS_AS(BuildSimplexNet(3, -0.1), ConfigError);
  CHECK_THROWS_AS(BuildSimplexNet(1, 0.5), ConfigError);
}

TEST_CASE("nets contain every vertex, even at eps = 1") {
  for (std::size_t k : {2u, 3u, 5u}) {
    SimplexNet net = BuildSimplexNet(k, 1.0);
    for (std::size_t i = 0; i < k; ++i) {
      auto v = SimplexPoint::Vertex(k, i);
      std::size_t idx = Nearest(net, v.coords());
      CHECK(L1Distance(net.point(idx), v.coords()) == 0.0);
      CHECK(net.VertexIndex(i) == idx);
    }
  }
}

TEST_CASE("net size matches the lattice count and has no duplicates") {
  for (std::size_t k : {2u, 3u, 4u}) {
    for (double eps : {1.0, 0.5, 0.25, 0.2}) {
      SimplexNet net = BuildSimplexNet(k, eps);
      std::size_t n = net.resolution();
      CHECK(net.step() <= eps / (2.0 * (k - 1)) + 1e-15);
      CHECK(net.size() == Binomial(n + k - 1, k - 1));
      std::set<std::vector<int>> seen;
      for (std::size_t i = 0; i < net.size(); ++i) {
        auto m = net.lattice(i);
        int sum = 0;
        for (int v : m) sum += v;
        CHECK(sum == static_cast<int>(n));
        CHECK(seen.insert(m).second);
        auto back = net.IndexOf(m);
        REQUIRE(back.has_value());
        CHECK(*back == i);
      }
    }
  }
}

TEST_CASE("coverage holds on random simplex points") {
  Rng rng(7);
  for (std::size_t k : {2u, 3u, 4u}) {
    double eps = k == 4 ? 0.5 : 0.25;
    SimplexNet net = BuildSimplexNet(k, eps);
    double worst = 0.0;
    const int draws = k == 4 ? 20000 : 100000;
    for (int i = 0; i < draws; ++i) {
      auto p = RandomSimplex(k, rng);
      worst = std::max(worst, L1Distance(net.point(Nearest(net, p)), p));
    }
    CHECK(worst <= eps);
  }
}

TEST_CASE("nearest is the exhaustive minimizer with lowest-index ties") {
  SimplexNet net = BuildSimplexNet(2, 0.5);
  std::vector<double> p{0.6, 0.4};
  std::size_t i = Nearest(net, p);
  CHECK(net.point(i)[0] == doctest::Approx(0.5));
  CHECK(L1Distance(net.point(i), p) == doctest::Approx(0.2));
  // Midway between (0.75, 0.25) at index 1 and (0.5, 0.5) at index 2.
  std::vector<double> mid{0.625, 0.375};
  CHECK(Nearest(net, mid) == 1);
  for (std::size_t j = 0; j < net.size(); ++j) {
    CHECK(Nearest(net, net.point(j)) == j);
  }
  std::vector<double> bad{0.2, 0.3, 0.5};
  CHECK_THROWS_AS(Nearest(net, bad), ConfigError);
}

TEST_CASE("net size cap") {
  NetOptions opts;
  opts.max_points = 100;
  CHECK_THROWS_AS(BuildSimplexNet(3, 0.25, opts), ConfigError);
  CHECK_NOTHROW(BuildSimplexNet(3, 0.5, opts));
  CHECK_THROWS_AS(BuildSimplexNet(12, 0.01), ConfigError);
}

TEST_CASE("binary grid values ascend") {
  auto grid = BinaryGridValues(BuildSimplexNet(2, 0.1));
  REQUIRE(grid.size() == 21);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    CHECK(grid[j] == doctest::Approx(0.05 * j));
  }
  CHECK_THROWS_AS(BinaryGridValues(BuildSimplexNet(3, 0.5)), ConfigError);
}

TEST_CASE("sample index frequencies") {
  Rng rng(3);
  std::vector<double> point{0.0, 0.0, 1.0};
  for (int i = 0; i < 100; ++i) CHECK(SampleIndex(point, rng) == 2);

  std::vector<double> uniform(4, 0.25);
  std::vector<int> counts(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[SampleIndex(uniform, rng)];
  for (int c : counts) {
    CHECK(c / double(n) >= 0.24);
    CHECK(c / double(n) <= 0.26);
  }

  std::vector<double> skew{0.1, 0.6, 0.3};
  std::vector<int> sc(3, 0);
  for (int i = 0; i < n; ++i) ++sc[SampleIndex(skew, rng)];
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(sc[j] / double(n) - skew[j]) <= 3.0 / std::sqrt(double(n)));
  }

  std::vector<double> tiny_negative{0.5 + 1e-13, 0.5, -1e-13};
  CHECK_NOTHROW(SampleIndex(tiny_negative, rng));
  std::vector<double> bad{0.5, 0.4};
  CHECK_THROWS_AS(SampleIndex(bad, rng), ConfigError);
  std::vector<double> negative{0.6, 0.5, -0.1};
  CHECK_THROWS_AS(SampleIndex(negative, rng), ConfigError);
}

TEST_CASE("seeded streams reproduce and split streams differ") {
  Rng a(42), b(42);
  std::vector<double> half{0.5, 0.5};
  for (int i = 0; i < 50; ++i) CHECK(SampleIndex(half, a) == SampleIndex(half, b));
  Rng c = Rng(42).Split(1), d = Rng(42).Split(1), e = Rng(42).Split(2);
  CHECK(c.seed() == d.seed());
  CHECK(c.seed() != e.seed());
  int same = 0;
  for (int i = 0; i < 64; ++i) same += (c() == e());
  CHECK(same == 0);
}

TEST_CASE("mixed action sampling") {
  Rng rng(5);
  MixedAction a{{3, 0.25}, {9, 0.75}};
  int nine = 0;
  for (int i = 0; i < 40000; ++i) {
    std::size_t s = SampleIndex(a, rng);
    CHECK((s == 3 || s == 9));
    nine += s == 9;
  }
  CHECK(std::abs(nine / 40000.0 - 0.75) < 0.015);
}
