#include "omnipred/verify.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "omnipred/oracles.h"
#include "omnipred/rng.h"
#include "omnipred/simplex_net.h"

namespace omnipred {
namespace {

std::vector<double> RandomSimplex(std::size_t k, Rng& rng) {
  std::vector<double> p(k);
  double s = 0.0;
  for (double& v : p) {
    v = -std::log(1.0 - rng.Uniform());
    s += v;
  }
  for (double& v : p) v /= s;
  return p;
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void Record(SuiteResult& r, double slack) {
  r.margin = std::min(r.margin, slack);
  if (slack < 0.0) ++r.failures;
}

}  // namespace

SuiteResult BinaryOracleSuite(std::size_t trials, double eps,
                              std::uint64_t seed) {
  SuiteResult r{"binary CMLOO (eps " + Num(eps) + ")", trials, 0,
                std::numeric_limits<double>::infinity()};
  Rng rng(seed);
  auto grid = BinaryGridValues(BuildSimplexNet(2, eps));
  for (std::size_t t = 0; t < trials; ++t) {
    BinaryOracleInput in;
    in.q = rng.Uniform();
    in.r = 1.0 - in.q;
    in.u = RandomSimplex(grid.size(), rng);
    in.d = 2 * rng.Uniform() - 1;
    auto a = BinaryCmloo(in, grid);
    auto h = ThresholdField(in.u, grid);
    for (double& v : h) v = in.q * v + in.r * in.d;
    for (int b : {0, 1}) {
      Record(r, eps + 1e-12 - BinaryMixturePayoff(a, h, grid, b));
    }
  }
  return r;
}

SuiteResult MulticlassOracleSuite(std::size_t k, double eps,
                                  std::size_t trials, std::uint64_t seed) {
  SuiteResult r{"multiclass MLOO (k " + std::to_string(k) + ", eps " +
                    Num(eps) + ")",
                trials, 0, std::numeric_limits<double>::infinity()};
  Rng rng(seed);
  auto net = BuildSimplexNet(k, eps);
  const auto n = static_cast<Eigen::Index>(net.size());
  const auto kk = static_cast<Eigen::Index>(k);
  for (std::size_t t = 0; t < trials; ++t) {
    Eigen::MatrixXd u(n, kk);
    Eigen::RowVectorXd d(kk);
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      u.data()[i] = 2 * rng.Uniform() - 1;
    }
    for (Eigen::Index i = 0; i < kk; ++i) d(i) = 2 * rng.Uniform() - 1;
    std::vector<AdjointApplier> appliers{
        [&](double w, Eigen::Ref<Eigen::MatrixXd> f) { f += w * u; },
        [&](double w, Eigen::Ref<Eigen::MatrixXd> f) {
          f.rowwise() += w * d;
        }};
    double q = rng.Uniform();
    std::vector<double> w{q, 1 - q};
    auto res = MulticlassMloo(w, appliers, net, 1.0, rng);
    for (std::size_t y = 0; y < k; ++y) {
      Record(r, 2 * eps + res.solver_gap + 1e-12 -
                    MixturePayoff(res.action, res.field, net, y));
    }
  }
  return r;
}

SuiteResult GameSolverSuite(std::size_t trials, double eps,
                            std::uint64_t seed) {
  SuiteResult r{"game solver certificate (eps " + Num(eps) + ")",
                trials, 0, std::numeric_limits<double>::infinity()};
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const int rows = 2 + static_cast<int>(rng.UniformIndex(3));
    const int cols = 2 + static_cast<int>(rng.UniformIndex(49));
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = 2 * rng.Uniform() - 1;
    }
    auto sol = SolveMatrixGame(m, eps, rng);
    Eigen::Map<const Eigen::VectorXd> a(sol.column.data(), cols);
    Eigen::Map<const Eigen::VectorXd> b(sol.row.data(), rows);
    // Recompute both certificates from the returned strategies.
    double upper = (m * a).maxCoeff();
    double lower = (b.transpose() * m).minCoeff();
    Record(r, eps + 1e-12 - (upper - lower));
  }
  return r;
}

std::vector<SuiteResult> RunOracleSuites(std::uint64_t seed) {
  std::vector<SuiteResult> out;
  out.push_back(BinaryOracleSuite(10000, 0.05, seed));
  out.push_back(MulticlassOracleSuite(2, 0.05, 300, seed + 1));
  out.push_back(MulticlassOracleSuite(3, 0.25, 300, seed + 2));
  out.push_back(MulticlassOracleSuite(4, 0.75, 300, seed + 3));
  out.push_back(GameSolverSuite(100, 0.01, seed + 4));
  return out;
}

}  // namespace omnipred
