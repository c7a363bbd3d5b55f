#include "omnipred/oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace omnipred {

std::vector<double> ThresholdField(std::span<const double> u,
                                   std::span<const double> grid) {
  if (u.size() != grid.size()) throw ConfigError("u must match the grid");
  double total = 0.0;
  for (double v : u) total += v;
  std::vector<double> h(grid.size());
  double prefix = 0.0;  // mass at thresholds s <= p
  for (std::size_t i = 0; i < grid.size(); ++i) {
    prefix += u[i];
    h[i] = 2.0 * prefix - total;
  }
  return h;
}

MixedAction BinaryCmlooFromField(std::span<const double> h,
                                 std::span<const double> grid) {
  const std::size_t n = grid.size();
  if (h.size() != n || n < 2) throw ConfigError("field must match the grid");
  if (h.front() >= 0.0) return PointMass(0);
  if (h.back() <= 0.0) return PointMass(n - 1);
  // h(grid[0]) < 0 < h(grid[n-1]): the first j with h(grid[j+1]) >= 0 has
  // h(grid[j]) < 0.
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (h[j + 1] >= 0.0) {
      double lo = std::abs(h[j]), hi = std::abs(h[j + 1]);
      return {{j, hi / (lo + hi)}, {j + 1, lo / (lo + hi)}};
    }
  }
  throw ContractError("binary oracle found no sign change");
}

MixedAction BinaryCmloo(const BinaryOracleInput& in,
                        std::span<const double> grid) {
  if (in.q < -1e-12 || in.r < -1e-12 || std::abs(in.q + in.r - 1.0) > 1e-9) {
    throw ConfigError("oracle weights (q, r) must lie on the simplex");
  }
  if (!(std::abs(in.d) <= 1.0 + 1e-12)) throw ConfigError("|d| must be <= 1");
  CheckDistribution(in.u);
  std::vector<double> h = ThresholdField(in.u, grid);
  for (double& v : h) v = in.q * v + in.r * in.d;
  return BinaryCmlooFromField(h, grid);
}

double BinaryMixturePayoff(const MixedAction& a, std::span<const double> h,
                           std::span<const double> grid, int b) {
  double f = 0.0;
  for (const auto& [i, w] : a) f += w * h[i] * (grid[i] - b);
  return f;
}

GameSolution SolveMatrixGame(const Eigen::MatrixXd& m, double eps, Rng& rng,
                             const GameSolverOptions& options) {
  (void)rng;  // deterministic; kept for the oracle calling convention
  if (!(eps > 0.0)) throw ConfigError("game solver needs eps > 0");
  const Eigen::Index k = m.rows(), n = m.cols();
  if (k == 0 || n == 0) throw ConfigError("empty game matrix");
  const double width = std::max(m.maxCoeff() - m.minCoeff(), 1e-300);
  const double log_k = std::log(static_cast<double>(k));

  Eigen::VectorXd log_w = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd b = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(k);   // sum of b_t
  Eigen::VectorXd col_pay = Eigen::VectorXd::Zero(k);   // sum of M e_{j_t}
  Eigen::VectorXd dual_pay = Eigen::VectorXd::Zero(n);  // sum of M^T b_t
  std::vector<double> counts(static_cast<std::size_t>(n), 0.0);

  GameSolution sol;
  for (std::size_t t = 1; t <= options.max_iterations; ++t) {
    Eigen::VectorXd r = m.transpose() * b;
    Eigen::Index j = 0;
    r.minCoeff(&j);
    dual_pay += r;
    row_sum += b;
    col_pay += m.col(j);
    counts[static_cast<std::size_t>(j)] += 1.0;

    const double inv_t = 1.0 / static_cast<double>(t);
    sol.upper = col_pay.maxCoeff() * inv_t;
    sol.lower = dual_pay.minCoeff() * inv_t;
    if (sol.upper - sol.lower <= eps || k == 1) {
      sol.iterations = t;
      sol.column.resize(static_cast<std::size_t>(n));
      for (std::size_t s = 0; s < counts.size(); ++s) {
        sol.column[s] = counts[s] * inv_t;
      }
      sol.row.assign(row_sum.data(), row_sum.data() + k);
      for (double& v : sol.row) v *= inv_t;
      return sol;
    }
    const double eta = std::sqrt(8.0 * log_k / static_cast<double>(t)) / width;
    log_w += eta * m.col(j);
    log_w.array() -= log_w.maxCoeff();
    b = log_w.array().exp();
    b /= b.sum();
  }
  throw ContractError("game solver hit its iteration cap with gap " +
                      std::to_string(sol.upper - sol.lower) + " > eps " +
                      std::to_string(eps));
}

GameMatrix BuildGameMatrix(const Eigen::MatrixXd& field, const SimplexNet& net,
                           double r) {
  const auto n = static_cast<Eigen::Index>(net.size());
  const auto k = static_cast<Eigen::Index>(net.k());
  if (field.rows() != n || field.cols() != k) {
    throw ConfigError("field must be |N| x k");
  }
  if (!(r > 0.0)) throw ConfigError("R must be positive");
  if (field.size() > 0 && field.cwiseAbs().maxCoeff() > r * (1.0 + 1e-12)) {
    throw ConfigError("field exceeds the adjoint bound R");
  }
  GameMatrix gm;
  gm.r = r;
  gm.field = field / r;
  gm.g.resize(n);
  gm.m.resize(k, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    auto pt = net.point(static_cast<std::size_t>(s));
    double g = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) g += gm.field(s, i) * pt[i];
    gm.g(s) = g;
    for (Eigen::Index i = 0; i < k; ++i) gm.m(i, s) = g - gm.field(s, i);
  }
  return gm;
}

MlooResult MulticlassMlooFromField(Eigen::MatrixXd field,
                                   const SimplexNet& net, double r, Rng& rng,
                                   const GameSolverOptions& options) {
  GameMatrix gm = BuildGameMatrix(field, net, r);
  MlooResult out;
  out.field = std::move(field);
  if (gm.m.cwiseAbs().maxCoeff() == 0.0) {
    // Every action is optimal; play uniformly.
    const double w = 1.0 / static_cast<double>(net.size());
    for (std::size_t s = 0; s < net.size(); ++s) out.action.push_back({s, w});
    return out;
  }
  double tol = options.tolerance > 0.0 ? options.tolerance : net.eps();
  GameSolution sol = SolveMatrixGame(gm.m, tol, rng, options);
  for (std::size_t s = 0; s < sol.column.size(); ++s) {
    if (sol.column[s] > 0.0) out.action.push_back({s, sol.column[s]});
  }
  out.solver_gap = sol.gap() * r;
  out.solver_iterations = sol.iterations;
  return out;
}

MlooResult MulticlassMloo(std::span<const double> w,
                          std::span<const AdjointApplier> appliers,
                          const SimplexNet& net, double r, Rng& rng,
                          const GameSolverOptions& options) {
  if (w.size() != appliers.size()) {
    throw ConfigError("one weight per approachability set");
  }
  Eigen::MatrixXd field = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(net.size()), static_cast<Eigen::Index>(net.k()));
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) appliers[i](w[i], field);
  }
  return MulticlassMlooFromField(std::move(field), net, r, rng, options);
}

double MixturePayoff(const MixedAction& a, const Eigen::MatrixXd& field,
                     const SimplexNet& net, std::size_t label) {
  double f = 0.0;
  for (const auto& [s, w] : a) {
    auto pt = net.point(s);
    double inner = -field(static_cast<Eigen::Index>(s),
                          static_cast<Eigen::Index>(label));
    for (std::size_t i = 0; i < net.k(); ++i) {
      inner += field(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) * pt[i];
    }
    f += w * inner;
  }
  return f;
}

}  // namespace omnipred
