#include "omnipred/losses.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "omnipred/core.h"

namespace omnipred {
namespace {

constexpr double kBoxTol = 1e-12;

void CheckBox(std::span<const double> t) {
  for (double v : t) {
    if (!(std::abs(v) <= 1.0 + kBoxTol)) {
      throw ConfigError("loss argument outside [-1, 1]");
    }
  }
}

double LogSumExp(std::span<const double> t) {
  double top = *std::max_element(t.begin(), t.end());
  double s = 0.0;
  for (double v : t) s += std::exp(v - top);
  return top + std::log(s);
}

class CrossEntropy final : public GlmLoss {
 public:
  explicit CrossEntropy(std::size_t k)
      : GlmLoss(k, 1.0 / (std::log(static_cast<double>(k)) + 2.0)) {}
  std::string id() const override { return "cross_entropy"; }
  double Omega(std::span<const double> t) const override {
    return LogSumExp(t);
  }
  std::vector<double> GradOmega(std::span<const double> t) const override {
    double lse = LogSumExp(t);
    std::vector<double> g(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) g[i] = std::exp(t[i] - lse);
    return g;
  }

  // KKT: t = clamp(log p + c, -1, 1) with c = log sum exp(t). When the
  // log-ratios fit in the box the optimum is a whole line; center it.
  std::vector<double> ExAnte(std::span<const double> p) const override {
    const std::size_t k = p.size();
    std::vector<double> logs(k);
    bool all_positive = true;
    for (std::size_t i = 0; i < k; ++i) {
      if (p[i] > 0.0) {
        logs[i] = std::log(p[i]);
      } else {
        logs[i] = -std::numeric_limits<double>::infinity();
        all_positive = false;
      }
    }
    if (all_positive) {
      auto [lo, hi] = std::minmax_element(logs.begin(), logs.end());
      if (*hi - *lo <= 2.0) {
        double mid = 0.5 * (*hi + *lo);
        for (double& v : logs) v -= mid;
        return logs;
      }
    }
    auto clamped = [&](double c) {
      std::vector<double> t(k);
      for (std::size_t i = 0; i < k; ++i) {
        t[i] = std::clamp(logs[i] + c, -1.0, 1.0);
      }
      return t;
    };
    // phi(c) = lse(clamped(c)) - c is nonincreasing with a root in
    // [log k - 1, log k + 1].
    double lo = std::log(static_cast<double>(k)) - 1.0;
    double hi = lo + 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      double mid = 0.5 * (lo + hi);
      if (LogSumExp(clamped(mid)) - mid > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return clamped(0.5 * (lo + hi));
  }
};

class BrierGlm final : public GlmLoss {
 public:
  explicit BrierGlm(std::size_t k) : GlmLoss(k, 0.5) {}
  std::string id() const override { return "brier"; }
  double Omega(std::span<const double> t) const override {
    auto q = ProjectToSimplex(t);
    double v = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) v += t[i] * q[i] - 0.5 * q[i] * q[i];
    return v;
  }
  std::vector<double> GradOmega(std::span<const double> t) const override {
    return ProjectToSimplex(t);
  }
  std::vector<double> ExAnte(std::span<const double> p) const override {
    return {p.begin(), p.end()};
  }
};

class MaxLinear final : public GlmLoss {
 public:
  explicit MaxLinear(std::size_t k) : GlmLoss(k, 0.5) {}
  std::string id() const override { return "max_linear"; }
  double Omega(std::span<const double> t) const override {
    return *std::max_element(t.begin(), t.end());
  }
  std::vector<double> GradOmega(std::span<const double> t) const override {
    std::vector<double> g(t.size(), 0.0);
    g[std::max_element(t.begin(), t.end()) - t.begin()] = 1.0;
    return g;
  }
  // The objective is piecewise linear and minimized at a box vertex; scan
  // them in bitmask order, first minimum wins.
  std::vector<double> ExAnte(std::span<const double> p) const override {
    const std::size_t k = p.size();
    std::vector<double> best, t(k);
    double best_v = std::numeric_limits<double>::infinity();
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
      for (std::size_t i = 0; i < k; ++i) t[i] = (mask >> i) & 1 ? 1.0 : -1.0;
      double v = Omega(t);
      for (std::size_t i = 0; i < k; ++i) v -= t[i] * p[i];
      if (v < best_v - 1e-15) {
        best_v = v;
        best = t;
      }
    }
    return best;
  }
};

class SquaredBinary final : public BinaryLoss {
 public:
  SquaredBinary() : BinaryLoss(1.0) {}
  std::string id() const override { return "squared"; }
  double Omega(double t) const override { return 0.25 * (t + 1) * (t + 1); }
  double Link(double t) const override { return 0.5 * (t + 1); }
  double ExAnte(double p) const override { return 2.0 * p - 1.0; }
};

class LogBinary final : public BinaryLoss {
 public:
  LogBinary() : BinaryLoss(1.0 / (std::log(2.0) + 2.0)) {}
  std::string id() const override { return "log"; }
  double Omega(double t) const override { return std::log1p(std::exp(t)); }
  double Link(double t) const override { return 1.0 / (1.0 + std::exp(-t)); }
  double ExAnte(double p) const override {
    if (p <= 0.0) return -1.0;
    if (p >= 1.0) return 1.0;
    return std::clamp(std::log(p / (1.0 - p)), -1.0, 1.0);
  }
};

class ThresholdBinary final : public BinaryLoss {
 public:
  explicit ThresholdBinary(double s) : BinaryLoss(1.0), s_(s) {}
  std::string id() const override {
    std::ostringstream os;
    os << "thresh_" << s_;
    return os.str();
  }
  double Omega(double t) const override { return s_ * t; }
  double Link(double) const override { return s_; }
  double ExAnte(double p) const override { return Sign(p - s_); }

 private:
  double s_;
};

}  // namespace

GlmLoss::GlmLoss(std::size_t k, double scale) : k_(k), scale_(scale) {
  if (k < 2) throw ConfigError("multiclass loss needs k >= 2");
}

double GlmLoss::Value(std::span<const double> t, std::size_t label) const {
  if (t.size() != k_ || label >= k_) throw ConfigError("loss: bad shape");
  CheckBox(t);
  return scale_ * (Omega(t) - t[label]);
}

double GlmLoss::ExpectedValue(std::span<const double> t,
                              std::span<const double> p) const {
  if (t.size() != k_ || p.size() != k_) throw ConfigError("loss: bad shape");
  CheckBox(t);
  double v = Omega(t);
  for (std::size_t i = 0; i < k_; ++i) v -= t[i] * p[i];
  return scale_ * v;
}

std::vector<double> GlmLoss::DiscreteDerivative(
    std::span<const double> t) const {
  std::vector<double> d(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) d[i] = -scale_ * t[i];
  return d;
}

GlmLossPtr MakeCrossEntropy(std::size_t k) {
  return std::make_shared<CrossEntropy>(k);
}
GlmLossPtr MakeBrierGlm(std::size_t k) { return std::make_shared<BrierGlm>(k); }
GlmLossPtr MakeMaxLinear(std::size_t k) {
  return std::make_shared<MaxLinear>(k);
}

GlmLossPtr MakeMulticlassLoss(const std::string& id, std::size_t k) {
  if (id == "cross_entropy") return MakeCrossEntropy(k);
  if (id == "brier") return MakeBrierGlm(k);
  if (id == "max_linear") return MakeMaxLinear(k);
  throw ConfigError("unknown multiclass loss: " + id);
}

std::vector<GlmLossPtr> MulticlassLossBank(std::size_t k) {
  return {MakeCrossEntropy(k), MakeBrierGlm(k), MakeMaxLinear(k)};
}

std::vector<double> ProjectToSimplex(std::span<const double> v) {
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  std::vector<double> q(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) q[i] = std::max(v[i] - theta, 0.0);
  return q;
}

double BinaryLoss::Value(double t, int y) const {
  if (!(std::abs(t) <= 1.0 + kBoxTol)) {
    throw ConfigError("loss argument outside [-1, 1]");
  }
  if (y != 0 && y != 1) throw ConfigError("binary label must be 0 or 1");
  return scale_ * (Omega(t) - t * y);
}

double BinaryLoss::ExpectedValue(double t, double p) const {
  return (1.0 - p) * Value(t, 0) + p * Value(t, 1);
}

BinaryLossPtr MakeSquaredBinary() { return std::make_shared<SquaredBinary>(); }
BinaryLossPtr MakeLogBinary() { return std::make_shared<LogBinary>(); }
BinaryLossPtr MakeThresholdBinary(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("threshold must be in [0,1]");
  return std::make_shared<ThresholdBinary>(s);
}

BinaryLossPtr MakeBinaryLoss(const std::string& id) {
  if (id == "squared") return MakeSquaredBinary();
  if (id == "log") return MakeLogBinary();
  if (id.rfind("thresh_", 0) == 0) {
    try {
      return MakeThresholdBinary(std::stod(id.substr(7)));
    } catch (const std::logic_error&) {
    }
  }
  throw ConfigError("unknown binary loss: " + id);
}

std::vector<BinaryLossPtr> BinaryLossBank() {
  std::vector<BinaryLossPtr> bank{MakeSquaredBinary(), MakeLogBinary()};
  for (int i = 1; i <= 9; ++i) bank.push_back(MakeThresholdBinary(0.1 * i));
  return bank;
}

double ThresholdValue(double s, double p, int y) {
  return -std::abs(p - s) + (p - y) * Sign(p - s);
}

std::vector<double> DiscreteDerivativeOf(const LossFunction& loss,
                                         std::span<const double> t,
                                         std::size_t k, double shift) {
  std::vector<double> d(k);
  for (std::size_t i = 0; i < k; ++i) d[i] = loss(t, i) - shift;
  return d;
}

double PiecewiseLinear::Value(double p) const {
  double v = value_at_zero, x = 0.0;
  std::size_t seg = 0;
  for (; seg < breakpoints.size() && breakpoints[seg] < p; ++seg) {
    v += slopes[seg] * (breakpoints[seg] - x);
    x = breakpoints[seg];
  }
  return v + slopes[seg] * (p - x);
}

double PiecewiseLinear::RightSlope(double p) const {
  std::size_t seg = std::upper_bound(breakpoints.begin(), breakpoints.end(),
                                     p) - breakpoints.begin();
  return slopes[seg];
}

PiecewiseLinear PiecewiseLinear::Interpolate(
    const std::function<double(double)>& f, std::size_t intervals) {
  PiecewiseLinear psi;
  psi.value_at_zero = f(0.0);
  const double h = 1.0 / static_cast<double>(intervals);
  for (std::size_t i = 0; i < intervals; ++i) {
    double a = h * static_cast<double>(i), b = h * static_cast<double>(i + 1);
    psi.slopes.push_back((f(b) - f(a)) / h);
    if (i > 0) psi.breakpoints.push_back(a);
  }
  return psi;
}

double ProperLossFromPotential(const PiecewiseLinear& psi, double p, int y) {
  return -psi.Value(p) + psi.RightSlope(p) * (p - y);
}

double ProperDecomposition::Value(double p, int y) const {
  double v = a * y + b;
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    v += weights[i] * ThresholdValue(breakpoints[i], p, y);
  }
  return v;
}

double ProperDecomposition::FoldedWeight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0) + std::abs(a);
}

ProperDecomposition DecomposeProper(const PiecewiseLinear& psi) {
  const auto& s = psi.breakpoints;
  if (psi.slopes.size() != s.size() + 1) {
    throw ConfigError("need one more slope than breakpoints");
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0 && s[i] < 1.0) || (i > 0 && !(s[i] > s[i - 1]))) {
      throw ConfigError("breakpoints must be sorted inside (0, 1)");
    }
  }
  for (double m : psi.slopes) {
    if (std::abs(m) > 2.0 + 1e-12) throw ConfigError("|psi'| must be <= 2");
  }
  ProperDecomposition d;
  d.breakpoints = s;
  double half_jump_total = 0.0, half_jump_moment = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double jump = psi.slopes[i + 1] - psi.slopes[i];
    if (jump < -1e-12) throw ConfigError("psi is not convex");
    jump = std::max(jump, 0.0);
    d.jumps.push_back(jump);
    d.weights.push_back(0.5 * jump);
    half_jump_total += 0.5 * jump;
    half_jump_moment += 0.5 * jump * s[i];
  }
  // psi(p) = alpha + beta p + sum_i (jump_i / 2) |p - s_i|.
  const double alpha = psi.value_at_zero - half_jump_moment;
  const double beta = psi.slopes.front() + half_jump_total;
  d.a = -beta;
  d.b = -alpha;
  return d;
}

}  // namespace omnipred
