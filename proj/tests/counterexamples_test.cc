#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "omnipred/counterexamples.h"

using namespace omnipred;

TEST_CASE("constant plays of the impossibility instance") {
  std::vector<std::array<double, 2>> e2(10, {0.0, 1.0});
  auto r = DemoMlooImpossibility(e2);
  CHECK(r.avg_v1 == 0.0);
  CHECK(r.avg_v2 == 1.0);
  std::vector<std::array<double, 2>> half(10, {0.5, 0.5});
  r = DemoMlooImpossibility(half);
  CHECK(r.avg_v1 == 0.5);
  CHECK(r.avg_v2 == 0.5);
  CHECK(r.max == 0.5);
  CHECK(r.mixture_value == 0.5);
}

TEST_CASE("averages always sum to one while each set alone is approachable") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    auto r = DemoMlooImpossibility(1 + rng.UniformIndex(300), rng);
    CHECK(std::abs(r.sum - 1.0) <= 1e-12);
    CHECK(r.max >= 0.5);
    CHECK(r.alone_v1 < 1e-3);
    CHECK(r.alone_v2 < 1e-3);
  }
}

TEST_CASE("squared-loss isotonic minimizer is the 3/7 matrix") {
  auto sol = SolveIsotonic(CanonicalIsotonicInstance(IsotonicLoss::kSquared));
  CHECK(std::abs(sol.t - 3.0 / 7) <= 1e-8);
  const double expected[2][3] = {{3.0 / 7, 2.0 / 7, 2.0 / 7},
                                 {3.0 / 7, 4.0 / 7, 0.0}};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(sol.p[i][j] - expected[i][j]) <= 1e-6);
    }
  }
  CHECK(sol.max_violation <= 1e-9);
  CHECK(std::abs(sol.derivative) <= 1e-5);
  // The scalar objective is half of (1-t)^2 + (1-t)^2/2 + 2t^2.
  double t = 3.0 / 7;
  double direct = 0.5 * ((1 - t) * (1 - t) + 0.5 * (1 - t) * (1 - t) + 2 * t * t);
  CHECK(sol.objective == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("log-loss isotonic minimizer differs") {
  auto sol = SolveIsotonic(CanonicalIsotonicInstance(IsotonicLoss::kLog));
  CHECK(std::abs(sol.t - 0.5) <= 1e-6);
  CHECK(sol.max_violation <= 1e-9);
  // -log(12/49) >= -log(1/4): the explicit candidate beats the 3/7 matrix.
  CHECK(-std::log(12.0 / 49) >= -std::log(0.25));
  auto v = VerifyIsotonicCounterexample();
  CHECK(v.pass);
  CHECK(v.candidate_beats);
  CHECK(v.candidate_log == doctest::Approx(-std::log(0.25)));
  CHECK(v.first_min_log == doctest::Approx(-std::log(12.0 / 49)));
}

TEST_CASE("verification margins") {
  // Zero solver tolerance runs to the iteration cap and still passes.
  auto v = VerifyIsotonicCounterexample(1e-6, 1e-3, 0.0);
  CHECK(v.pass);
  CHECK(v.matrix_error <= 1e-6);
  CHECK(v.t_margin > 1e-3);
  // Comparing squared with itself finds identical minimizers.
  auto same = VerifyIsotonicCounterexample(1e-6, 1e-3, 1e-10,
                                           IsotonicLoss::kSquared,
                                           IsotonicLoss::kSquared);
  CHECK_FALSE(same.pass);
  CHECK(same.t_margin == 0.0);
}

TEST_CASE("equal unlinked points are unconstrained") {
  IsotonicInstance inst;
  inst.v = {{0.2, 0.0, 0.1}, {0.2, 0.0, 0.1}};
  inst.y = {0, 0};
  auto sol = SolveIsotonic(inst);
  CHECK(sol.p[0] == std::vector<double>{1, 0, 0});
  CHECK(sol.p[1] == std::vector<double>{1, 0, 0});
  CHECK(sol.objective == 0.0);
  CHECK(sol.max_violation <= 1e-9);
}

TEST_CASE("mirrored instance and rejected inputs") {
  IsotonicInstance inst;
  inst.v = {{1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
  inst.y = {1, 0};
  auto sol = SolveIsotonic(inst);
  CHECK(std::abs(sol.t - 3.0 / 7) <= 1e-8);
  CHECK(sol.max_violation <= 1e-9);

  IsotonicInstance bad = CanonicalIsotonicInstance(IsotonicLoss::kSquared);
  bad.v[1] = {1.0, 1.0, 0.0};
  CHECK_THROWS_AS(SolveIsotonic(bad), ConfigError);
  bad = CanonicalIsotonicInstance(IsotonicLoss::kSquared);
  bad.v.push_back({0, 0, 1});
  bad.y.push_back(2);
  CHECK_THROWS_AS(SolveIsotonic(bad), ConfigError);
}
