#include "omnipred/counterexamples.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace omnipred {

double CoordinatePayoffSet::Pairing(const MixedAction& a, std::size_t,
                                    std::span<const double>) const {
  double m = 0.0;
  for (const auto& [i, w] : a) m += i == coord_ ? w : 0.0;
  return m;
}

void CoordinatePayoffSet::Observe(const MixedAction& a, std::size_t label,
                                  std::span<const double> x) {
  sum_ += Pairing(a, label, x);
  ++t_;
}

double CoordinatePayoffSet::SupAverage() const {
  return t_ ? sum_ / static_cast<double>(t_) : 0.0;
}

namespace {

class ConstantOracle final : public Oracle {
 public:
  explicit ConstantOracle(std::size_t vertex) : vertex_(vertex) {}
  MixedAction Respond(std::span<const double>, std::span<const double>,
                      Rng&) override {
    return PointMass(vertex_);
  }
  double eps() const override { return 0.0; }

 private:
  std::size_t vertex_;
};

double ApproachAlone(std::size_t coord, std::size_t T) {
  CoordinatePayoffSet set(coord);
  // Playing the other vertex zeroes this set's payoff.
  ConstantOracle oracle(1 - coord);
  PayoffSet* sets[] = {&set};
  std::vector<Example> stream(T, Example{{}, 0});
  ApproachOptions opt;
  opt.mode = ApproachMode::kDeterministic;
  opt.keep_log = false;
  Rng rng(0);
  RunApproach(sets, oracle, stream, opt, rng);
  return set.SupAverage();
}

}  // namespace

ImpossibilityReport DemoMlooImpossibility(
    std::span<const std::array<double, 2>> actions) {
  if (actions.empty()) throw ConfigError("need at least one round");
  ImpossibilityReport rep;
  rep.rounds = actions.size();
  CoordinatePayoffSet s1(0), s2(1);
  for (const auto& a : actions) {
    CheckDistribution(a);
    MixedAction m = {{0, a[0]}, {1, a[1]}};
    s1.Observe(m, 0, {});
    s2.Observe(m, 0, {});
  }
  rep.avg_v1 = s1.SupAverage();
  rep.avg_v2 = s2.SupAverage();
  rep.sum = rep.avg_v1 + rep.avg_v2;
  rep.max = std::max(rep.avg_v1, rep.avg_v2);
  rep.alone_v1 = ApproachAlone(0, actions.size());
  rep.alone_v2 = ApproachAlone(1, actions.size());
  return rep;
}

ImpossibilityReport DemoMlooImpossibility(std::size_t T, Rng& rng) {
  std::vector<std::array<double, 2>> actions(T);
  for (auto& a : actions) {
    a[0] = rng.Uniform();
    a[1] = 1.0 - a[0];
  }
  return DemoMlooImpossibility(actions);
}

std::string IsotonicLossName(IsotonicLoss loss) {
  return loss == IsotonicLoss::kSquared ? "squared" : "log";
}

IsotonicInstance CanonicalIsotonicInstance(IsotonicLoss loss) {
  IsotonicInstance inst;
  inst.v = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  inst.y = {0, 1};
  inst.loss = loss;
  return inst;
}

double IsotonicObjective(const IsotonicInstance& inst,
                         const std::vector<std::vector<double>>& p) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (inst.loss == IsotonicLoss::kSquared) {
      for (std::size_t j = 0; j < p[i].size(); ++j) {
        double r = p[i][j] - (j == inst.y[i] ? 1.0 : 0.0);
        total += 0.5 * r * r;
      }
    } else {
      double q = p[i][inst.y[i]];
      total += q > 0.0 ? -std::log(q) : std::numeric_limits<double>::infinity();
    }
  }
  return total;
}

double MaxCyclicViolation(const std::vector<std::vector<double>>& v,
                          const std::vector<std::vector<double>>& p,
                          const std::vector<double>& f) {
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) {
      double lhs = 0.0;
      for (std::size_t c = 0; c < v[i].size(); ++c) {
        lhs += p[j][c] * (v[i][c] - v[j][c]);
      }
      worst = std::max(worst, lhs - (f[i] - f[j]));
    }
  }
  return worst;
}

namespace {

// Minimizes a unimodal function on (lo, hi) without touching the endpoints.
double GoldenSection(const std::function<double(double)>& g, double lo,
                     double hi, double tol) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 300 && b - a > tol; ++it) {
    if (gc <= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - r * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + r * (b - a);
      gd = g(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

IsotonicSolution SolveIsotonic(const IsotonicInstance& inst, double tol) {
  if (inst.v.size() != 2 || inst.y.size() != 2) {
    throw ConfigError("isotonic solver is certified only for n = 2");
  }
  const std::size_t k = 3;
  for (const auto& vi : inst.v) {
    if (vi.size() != k) throw ConfigError("isotonic solver needs k = 3");
  }
  if (inst.y[0] >= k || inst.y[1] >= k) throw ConfigError("label out of range");

  std::vector<double> diff(k);
  for (std::size_t c = 0; c < k; ++c) diff[c] = inst.v[0][c] - inst.v[1][c];
  IsotonicSolution sol;
  sol.f = {0.0, 0.0};

  bool equal = std::all_of(diff.begin(), diff.end(),
                           [](double x) { return x == 0.0; });
  if (equal) {
    // No constraint binds: each point takes its own label.
    for (std::size_t i = 0; i < 2; ++i) {
      std::vector<double> p(k, 0.0);
      p[inst.y[i]] = 1.0;
      sol.p.push_back(p);
    }
    sol.t = 1.0;
    sol.objective = IsotonicObjective(inst, sol.p);
    sol.max_violation = MaxCyclicViolation(inst.v, sol.p, sol.f);
    return sol;
  }

  // Find the single nonzero coordinate c with diff = -e_c (or +e_c, which is
  // the same problem with the points swapped).
  std::size_t c = k, nonzero = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (diff[j] != 0.0) {
      ++nonzero;
      c = j;
    }
  }
  if (nonzero != 1 || std::abs(diff[c]) != 1.0) {
    throw ConfigError("isotonic instance outside the certified family");
  }
  // lo is the point whose c-coordinate is constrained from above.
  std::size_t lo = diff[c] < 0.0 ? 0 : 1, hi = 1 - lo;
  if (inst.y[lo] != c || inst.y[hi] == c) {
    throw ConfigError("isotonic instance outside the certified family");
  }
  const std::size_t other = inst.y[hi];
  const std::size_t rest = 3 - c - other;

  auto build = [&](double t) {
    std::vector<std::vector<double>> p(2, std::vector<double>(k, 0.0));
    p[lo][c] = t;
    p[lo][other] = 0.5 * (1.0 - t);
    p[lo][rest] = 0.5 * (1.0 - t);
    p[hi][c] = t;
    p[hi][other] = 1.0 - t;
    return p;
  };
  auto objective = [&](double t) { return IsotonicObjective(inst, build(t)); };
  sol.t = GoldenSection(objective, 0.0, 1.0, tol);
  sol.p = build(sol.t);
  sol.objective = objective(sol.t);
  const double h = 1e-6;
  sol.derivative = (objective(sol.t + h) - objective(sol.t - h)) / (2 * h);
  // Any f_lo - f_hi in [<p_hi, v_lo - v_hi>, <p_lo, v_lo - v_hi>] works;
  // take the lower end.
  double gap = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    gap += sol.p[hi][j] * (inst.v[lo][j] - inst.v[hi][j]);
  }
  sol.f[hi] = 0.0;
  sol.f[lo] = gap;
  sol.max_violation = MaxCyclicViolation(inst.v, sol.p, sol.f);
  return sol;
}

IsotonicVerification VerifyIsotonicCounterexample(double matrix_tol,
                                                  double t_tol,
                                                  double solver_tol,
                                                  IsotonicLoss first,
                                                  IsotonicLoss second) {
  IsotonicVerification out;
  IsotonicSolution a = SolveIsotonic(CanonicalIsotonicInstance(first), solver_tol);
  IsotonicSolution b = SolveIsotonic(CanonicalIsotonicInstance(second), solver_tol);
  out.first_t = a.t;
  out.second_t = b.t;
  const double expected[2][3] = {{3.0 / 7, 2.0 / 7, 2.0 / 7},
                                 {3.0 / 7, 4.0 / 7, 0.0}};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      out.matrix_error =
          std::max(out.matrix_error, std::abs(a.p[i][j] - expected[i][j]));
    }
  }
  out.t_margin = std::abs(b.t - a.t);
  IsotonicInstance log_inst = CanonicalIsotonicInstance(IsotonicLoss::kLog);
  out.candidate_log =
      IsotonicObjective(log_inst, {{0.5, 0.25, 0.25}, {0.5, 0.5, 0.0}});
  out.first_min_log = IsotonicObjective(log_inst, a.p);
  out.candidate_beats = out.candidate_log < out.first_min_log;
  out.pass = out.matrix_error <= matrix_tol && out.t_margin > t_tol;
  return out;
}

}  // namespace omnipred
