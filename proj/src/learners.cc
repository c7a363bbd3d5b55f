#include "omnipred/learners.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "omnipred/core.h"

namespace omnipred {
namespace {

constexpr double kGainSlack = 1e-9;

double Norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

MwuState MakeMwu(std::size_t m, double eta, double gain_bound) {
  if (m == 0) throw ConfigError("MWU needs at least one arm");
  if (!(eta >= 0.0) || !(gain_bound > 0.0)) {
    throw ConfigError("MWU needs eta >= 0 and L > 0");
  }
  MwuState s;
  s.weights.assign(m, 1.0 / static_cast<double>(m));
  s.log_weights.assign(m, 0.0);
  s.eta = eta;
  s.gain_bound = gain_bound;
  return s;
}

MwuState MwuUpdate(const MwuState& state, std::span<const double> gains) {
  const std::size_t m = state.weights.size();
  if (gains.size() != m) throw ConfigError("MWU gain dimension mismatch");
  for (double g : gains) {
    if (!std::isfinite(g) || std::abs(g) > state.gain_bound + kGainSlack) {
      throw ContractError("MWU gain " + std::to_string(g) +
                          " exceeds bound " + std::to_string(state.gain_bound));
    }
  }
  MwuState next = state;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    next.log_weights[i] += state.eta * gains[i];
    top = std::max(top, next.log_weights[i]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    next.log_weights[i] -= top;
    next.weights[i] = std::exp(next.log_weights[i]);
    total += next.weights[i];
  }
  for (double& w : next.weights) w /= total;
  ++next.t;
  return next;
}

double MwuStepSize(std::size_t m, double gain_bound, std::size_t horizon,
                   bool sampled) {
  if (horizon == 0) throw ConfigError("horizon must be >= 1");
  double t = static_cast<double>(horizon) * (sampled ? 5.0 : 1.0);
  return std::sqrt(2.0 * std::log(static_cast<double>(m))) /
         (gain_bound * std::sqrt(t));
}

FeasibleSet FeasibleSet::Box(std::size_t dim) {
  FeasibleSet s;
  s.kind = FeasibleKind::kBox;
  s.dim = dim;
  return s;
}

FeasibleSet FeasibleSet::Ball(std::size_t dim, double radius) {
  if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
  FeasibleSet s;
  s.kind = FeasibleKind::kBall;
  s.dim = dim;
  s.radius = radius;
  return s;
}

FeasibleSet FeasibleSet::RowBall(std::size_t rows, std::size_t cols) {
  FeasibleSet s;
  s.kind = FeasibleKind::kRowBall;
  s.dim = rows * cols;
  s.rows = rows;
  s.cols = cols;
  return s;
}

void FeasibleSet::Project(std::span<double> x) const {
  switch (kind) {
    case FeasibleKind::kBox:
      for (double& v : x) v = std::clamp(v, -radius, radius);
      return;
    case FeasibleKind::kBall: {
      double n = Norm2(x);
      if (n > radius) {
        for (double& v : x) v *= radius / n;
      }
      return;
    }
    case FeasibleKind::kRowBall:
      for (std::size_t r = 0; r < rows; ++r) {
        auto row = x.subspan(r * cols, cols);
        double n = Norm2(row);
        if (n > 1.0) {
          for (double& v : row) v /= n;
        }
      }
      return;
  }
}

bool FeasibleSet::Contains(std::span<const double> x, double tol) const {
  if (x.size() != dim) return false;
  switch (kind) {
    case FeasibleKind::kBox:
      return std::all_of(x.begin(), x.end(),
                         [&](double v) { return std::abs(v) <= radius + tol; });
    case FeasibleKind::kBall:
      return Norm2(x) <= radius + tol;
    case FeasibleKind::kRowBall:
      for (std::size_t r = 0; r < rows; ++r) {
        if (Norm2(x.subspan(r * cols, cols)) > 1.0 + tol) return false;
      }
      return true;
  }
  return false;
}

double FeasibleSet::DefaultGainBound() const {
  switch (kind) {
    case FeasibleKind::kBox:
      return 2.0;
    case FeasibleKind::kBall:
      return 1.0;
    case FeasibleKind::kRowBall:
      return 2.0;
  }
  return 0.0;
}

double FeasibleSet::Support(std::span<const double> g) const {
  if (g.size() != dim) throw ConfigError("support: dimension mismatch");
  switch (kind) {
    case FeasibleKind::kBox: {
      double s = 0.0;
      for (double v : g) s += std::abs(v);
      return radius * s;
    }
    case FeasibleKind::kBall:
      return radius * Norm2(g);
    case FeasibleKind::kRowBall: {
      double s = 0.0;
      for (std::size_t r = 0; r < rows; ++r) s += Norm2(g.subspan(r * cols, cols));
      return s;
    }
  }
  return 0.0;
}

PgdState MakePgd(const FeasibleSet& set, double eta, double gain_bound) {
  if (set.dim == 0) throw ConfigError("empty feasible set");
  if (!(eta >= 0.0)) throw ConfigError("PGD step must be >= 0");
  PgdState s;
  s.set = set;
  s.point.assign(set.dim, 0.0);
  s.eta = eta;
  s.gain_bound = gain_bound > 0.0 ? gain_bound : set.DefaultGainBound();
  return s;
}

PgdState PgdUpdate(const PgdState& state, std::span<const double> gain) {
  if (gain.size() != state.point.size()) {
    throw ConfigError("PGD gain dimension mismatch");
  }
  double n = Norm2(gain);
  if (!std::isfinite(n) || n > state.gain_bound + kGainSlack) {
    throw ContractError("PGD gain norm " + std::to_string(n) +
                        " exceeds bound " + std::to_string(state.gain_bound));
  }
  PgdState next = state;
  for (std::size_t i = 0; i < gain.size(); ++i) {
    next.point[i] += state.eta * gain[i];
  }
  next.set.Project(next.point);
  ++next.t;
  return next;
}

double BoxStepSize(double eps) { return eps / 2.0; }

double BallStepSize(std::size_t horizon, double radius) {
  return radius / std::sqrt(static_cast<double>(horizon));
}

double RowBallStepSize(std::size_t rows, std::size_t horizon) {
  return 0.5 * std::sqrt(static_cast<double>(rows) /
                         static_cast<double>(horizon));
}

std::string PgdLearner::name() const {
  switch (state_.set.kind) {
    case FeasibleKind::kBox:
      return "pgd-box";
    case FeasibleKind::kBall:
      return "pgd-ball";
    case FeasibleKind::kRowBall:
      return "pgd-rowball";
  }
  return "pgd";
}

RegretKind ParseRegretKind(const std::string& name) {
  if (name == "mwu") return RegretKind::kMwu;
  if (name == "pgd-ball") return RegretKind::kPgdBall;
  if (name == "pgd-rowball") return RegretKind::kPgdRowBall;
  if (name == "pgd-box") return RegretKind::kPgdBox;
  if (name == "binary-calibration") return RegretKind::kBinaryCalibration;
  if (name == "high-probability") return RegretKind::kHighProbability;
  if (name == "stat-box-calibration") return RegretKind::kStatBoxCalibration;
  if (name == "stat-binary-calibration") {
    return RegretKind::kStatBinaryCalibration;
  }
  if (name == "stat-linear-binary") return RegretKind::kStatLinearBinary;
  if (name == "stat-linear-multiclass") {
    return RegretKind::kStatLinearMulticlass;
  }
  throw ConfigError("unknown regret kind: " + name);
}

double TheoreticalRegret(RegretKind kind, std::size_t horizon,
                         const RegretParams& p) {
  if (horizon == 0) throw ConfigError("horizon must be >= 1");
  const double t = static_cast<double>(horizon);
  const double k = static_cast<double>(p.k);
  const double log_inv_delta2 = std::log(2.0 / p.delta);
  switch (kind) {
    case RegretKind::kMwu:
      return p.gain_bound *
             std::sqrt(2.0 * t * std::log(static_cast<double>(p.arms)));
    case RegretKind::kPgdBall:
      return p.radius * p.gain_bound * std::sqrt(t);
    case RegretKind::kPgdRowBall:
      return 2.0 * std::sqrt(k * t);
    case RegretKind::kPgdBox:
      return p.eps * t + k * static_cast<double>(p.net_size) / p.eps;
    case RegretKind::kBinaryCalibration:
      return std::sqrt(2.0 * t * std::log(1.0 / p.eps + 2.0));
    case RegretKind::kHighProbability:
      return 4.0 * p.gain_bound * std::sqrt(t * p.theta) +
             16.0 * p.gain_bound * p.radius * std::sqrt(t * log_inv_delta2);
    case RegretKind::kStatBoxCalibration:
      return p.eps * t + 10.0 * k * static_cast<double>(p.net_size) / p.eps +
             32.0 * std::sqrt(t * log_inv_delta2);
    case RegretKind::kStatBinaryCalibration:
      return 20.0 * std::sqrt(t * std::log(4.0 / (p.delta * p.eps)));
    case RegretKind::kStatLinearBinary:
      return 20.0 * std::sqrt(t * log_inv_delta2);
    case RegretKind::kStatLinearMulticlass:
      return 40.0 * std::sqrt(k * t * log_inv_delta2);
  }
  throw ConfigError("unknown regret kind");
}

}  // namespace omnipred
