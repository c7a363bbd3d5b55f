#include "omnipred/payoff_sets.h"

#include <algorithm>
#include <cmath>

#include "omnipred/oracles.h"

namespace omnipred {

namespace {

double MeanOf(const MixedAction& a, std::span<const double> grid) {
  double m = 0.0;
  for (const auto& [i, w] : a) m += w * grid[i];
  return m;
}

Eigen::VectorXd FeatureVector(FeatureMap map, std::span<const double> x) {
  auto phi = ApplyFeatureMap(map, x);
  return Eigen::Map<const Eigen::VectorXd>(phi.data(), phi.size());
}

void CheckBinaryLabel(std::size_t label) {
  if (label > 1) throw ContractError("binary label must be 0 or 1");
}

}  // namespace

// ---- binary calibration ----------------------------------------------------

BinaryCalibrationSet::BinaryCalibrationSet(std::vector<double> grid,
                                           const SetOptions& options)
    : grid_(std::move(grid)),
      options_(options),
      learner_(grid_.size(), MwuStepSize(grid_.size(), 1.0, options.horizon),
               1.0),
      sums_(grid_.size(), 0.0) {}

std::vector<double> BinaryCalibrationSet::Gain(const MixedAction& a,
                                               std::size_t label) const {
  CheckBinaryLabel(label);
  std::vector<double> g(grid_.size(), 0.0);
  const double b = static_cast<double>(label);
  for (const auto& [i, w] : a) {
    double p = grid_[i];
    double r = w * (p - b);
    for (std::size_t s = 0; s < grid_.size(); ++s) {
      g[s] += r * Sign(p - grid_[s]);
    }
  }
  return g;
}

double BinaryCalibrationSet::Pairing(const MixedAction& a, std::size_t label,
                                     std::span<const double>) const {
  auto g = Gain(a, label);
  auto u = learner_.Point();
  double v = 0.0;
  for (std::size_t s = 0; s < g.size(); ++s) v += u[s] * g[s];
  return v;
}

void BinaryCalibrationSet::Observe(const MixedAction& a, std::size_t label,
                                   std::span<const double>) {
  auto g = Gain(a, label);
  for (std::size_t s = 0; s < g.size(); ++s) sums_[s] += g[s];
  learner_.Observe(g);
  ++t_;
}

double BinaryCalibrationSet::SupAverage() const {
  if (t_ == 0) return 0.0;
  return *std::max_element(sums_.begin(), sums_.end()) / double(t_);
}

double BinaryCalibrationSet::RegretBound(std::size_t horizon) const {
  RegretParams p;
  p.arms = grid_.size();
  p.eps = options_.eps;
  p.delta = options_.delta;
  return TheoreticalRegret(options_.statistical
                               ? RegretKind::kStatBinaryCalibration
                               : RegretKind::kMwu,
                           horizon, p);
}

void BinaryCalibrationSet::AddAdjointAt(std::span<const double> point,
                                        double weight,
                                        std::span<const double>,
                                        Eigen::Ref<Eigen::MatrixXd> field) const {
  auto h = ThresholdField(point, grid_);
  for (std::size_t p = 0; p < h.size(); ++p) field(p, 0) += weight * h[p];
}

// ---- binary multiaccuracy --------------------------------------------------

BinaryMultiaccuracySet::BinaryMultiaccuracySet(std::vector<double> grid,
                                               std::size_t d, FeatureMap map,
                                               const SetOptions& options)
    : grid_(std::move(grid)),
      map_(map),
      options_(options),
      learner_(FeasibleSet::Ball(d), BallStepSize(options.horizon), 1.0),
      sum_(Eigen::VectorXd::Zero(d)) {}

double BinaryMultiaccuracySet::Residual(const MixedAction& a,
                                        std::size_t label) const {
  CheckBinaryLabel(label);
  return MeanOf(a, grid_) - static_cast<double>(label);
}

double BinaryMultiaccuracySet::Pairing(const MixedAction& a,
                                       std::size_t label,
                                       std::span<const double> x) const {
  Eigen::Map<const Eigen::VectorXd> c(learner_.Point().data(), sum_.size());
  return -c.dot(FeatureVector(map_, x)) * Residual(a, label);
}

void BinaryMultiaccuracySet::Observe(const MixedAction& a, std::size_t label,
                                     std::span<const double> x) {
  Eigen::VectorXd phi = FeatureVector(map_, x);
  if (phi.size() != sum_.size()) throw ContractError("feature size mismatch");
  Eigen::VectorXd v = Residual(a, label) * phi;
  sum_ += v;
  Eigen::VectorXd gain = -v;
  learner_.Observe({gain.data(), static_cast<std::size_t>(gain.size())});
  ++t_;
}

double BinaryMultiaccuracySet::SupAverage() const {
  return t_ ? sum_.norm() / double(t_) : 0.0;
}

double BinaryMultiaccuracySet::RegretBound(std::size_t horizon) const {
  RegretParams p;
  p.delta = options_.delta;
  return TheoreticalRegret(options_.statistical ? RegretKind::kStatLinearBinary
                                                : RegretKind::kPgdBall,
                           horizon, p);
}

void BinaryMultiaccuracySet::AddAdjointAt(
    std::span<const double> point, double weight, std::span<const double> x,
    Eigen::Ref<Eigen::MatrixXd> field) const {
  Eigen::Map<const Eigen::VectorXd> c(point.data(), point.size());
  double u = -c.dot(FeatureVector(map_, x));
  field.col(0).array() += weight * u;
}

// ---- multiclass calibration ------------------------------------------------

MulticlassCalibrationSet::MulticlassCalibrationSet(const SimplexNet& net,
                                                   const SetOptions& options)
    : net_(net),
      options_(options),
      learner_(FeasibleSet::Box(net.size() * net.k()),
               options.statistical ? options.eps / 10.0
                                   : BoxStepSize(options.eps)),
      sums_(net.size() * net.k(), 0.0),
      gain_(net.size() * net.k(), 0.0) {}

double MulticlassCalibrationSet::Pairing(const MixedAction& a,
                                         std::size_t label,
                                         std::span<const double>) const {
  const std::size_t k = net_.k();
  if (label >= k) throw ContractError("label out of range");
  auto u = learner_.Point();
  double v = 0.0;
  for (const auto& [s, w] : a) {
    auto p = net_.point(s);
    for (std::size_t i = 0; i < k; ++i) {
      v += w * u[s * k + i] * (p[i] - (i == label ? 1.0 : 0.0));
    }
  }
  return v;
}

void MulticlassCalibrationSet::Observe(const MixedAction& a, std::size_t label,
                                       std::span<const double>) {
  const std::size_t k = net_.k();
  if (label >= k) throw ContractError("label out of range");
  for (const auto& [s, w] : a) {
    auto p = net_.point(s);
    for (std::size_t i = 0; i < k; ++i) {
      double g = w * (p[i] - (i == label ? 1.0 : 0.0));
      gain_[s * k + i] += g;
      sums_[s * k + i] += g;
    }
  }
  learner_.Observe(gain_);
  for (const auto& [s, w] : a) {
    std::fill_n(gain_.begin() + s * k, k, 0.0);
  }
  ++t_;
}

double MulticlassCalibrationSet::SupAverage() const {
  if (t_ == 0) return 0.0;
  double v = 0.0;
  for (double s : sums_) v += std::abs(s);
  return v / double(t_);
}

double MulticlassCalibrationSet::RegretBound(std::size_t horizon) const {
  RegretParams p;
  p.eps = options_.eps;
  p.k = net_.k();
  p.net_size = net_.size();
  p.delta = options_.delta;
  return TheoreticalRegret(options_.statistical
                               ? RegretKind::kStatBoxCalibration
                               : RegretKind::kPgdBox,
                           horizon, p);
}

void MulticlassCalibrationSet::AddAdjointAt(
    std::span<const double> point, double weight, std::span<const double>,
    Eigen::Ref<Eigen::MatrixXd> field) const {
  const std::size_t k = net_.k();
  for (std::size_t s = 0; s < net_.size(); ++s) {
    for (std::size_t i = 0; i < k; ++i) field(s, i) += weight * point[s * k + i];
  }
}

// ---- multiclass multiaccuracy ----------------------------------------------

MulticlassMultiaccuracySet::MulticlassMultiaccuracySet(
    const SimplexNet& net, std::size_t d, FeatureMap map,
    const SetOptions& options, std::string id_suffix)
    : net_(net),
      d_(d),
      map_(map),
      options_(options),
      id_("multiaccuracy_" + FeatureMapName(map) + id_suffix),
      learner_(FeasibleSet::RowBall(net.k(), d),
               RowBallStepSize(net.k(), options.horizon)),
      sum_(Eigen::MatrixXd::Zero(net.k(), d)) {}

Eigen::VectorXd MulticlassMultiaccuracySet::Residual(const MixedAction& a,
                                                     std::size_t label) const {
  const std::size_t k = net_.k();
  if (label >= k) throw ContractError("label out of range");
  Eigen::VectorXd r = Eigen::VectorXd::Zero(k);
  for (const auto& [s, w] : a) {
    auto p = net_.point(s);
    for (std::size_t i = 0; i < k; ++i) r[i] += w * p[i];
  }
  r[label] -= 1.0;
  return r;
}

Eigen::VectorXd MulticlassMultiaccuracySet::Distinguisher(
    std::span<const double> point, std::span<const double> x) const {
  // Row-major k x d storage.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      c(point.data(), net_.k(), d_);
  return -(c * FeatureVector(map_, x));
}

double MulticlassMultiaccuracySet::Pairing(const MixedAction& a,
                                           std::size_t label,
                                           std::span<const double> x) const {
  return Distinguisher(learner_.Point(), x).dot(Residual(a, label));
}

void MulticlassMultiaccuracySet::Observe(const MixedAction& a,
                                         std::size_t label,
                                         std::span<const double> x) {
  Eigen::VectorXd phi = FeatureVector(map_, x);
  if (static_cast<std::size_t>(phi.size()) != d_) {
    throw ContractError("feature size mismatch");
  }
  Eigen::MatrixXd v = Residual(a, label) * phi.transpose();
  sum_ += v;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> gain =
      -v;
  learner_.Observe({gain.data(), static_cast<std::size_t>(gain.size())});
  ++t_;
}

double MulticlassMultiaccuracySet::SupAverage() const {
  return t_ ? sum_.rowwise().norm().sum() / double(t_) : 0.0;
}

double MulticlassMultiaccuracySet::RegretBound(std::size_t horizon) const {
  RegretParams p;
  p.k = net_.k();
  p.delta = options_.delta;
  return TheoreticalRegret(options_.statistical
                               ? RegretKind::kStatLinearMulticlass
                               : RegretKind::kPgdRowBall,
                           horizon, p);
}

void MulticlassMultiaccuracySet::AddAdjointAt(
    std::span<const double> point, double weight, std::span<const double> x,
    Eigen::Ref<Eigen::MatrixXd> field) const {
  Eigen::RowVectorXd u = Distinguisher(point, x).transpose();
  field.rowwise() += weight * u;
}

}  // namespace omnipred
