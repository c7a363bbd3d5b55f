#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace omnipred {

// Multiclass GLM loss l(t, y) = scale * (omega(t) - t_y) on t in [-1,1]^k.
// grad omega maps into the simplex, so d_l(t) = -scale * t.
class GlmLoss {
 public:
  virtual ~GlmLoss() = default;

  virtual std::string id() const = 0;
  std::size_t k() const { return k_; }
  double scale() const { return scale_; }

  // Unscaled potential and its gradient (a point of the simplex).
  virtual double Omega(std::span<const double> t) const = 0;
  virtual std::vector<double> GradOmega(std::span<const double> t) const = 0;
  // argmin over the box of omega(t) - <t, p>.
  virtual std::vector<double> ExAnte(std::span<const double> p) const = 0;

  // Throws if t leaves the box or the label is out of range.
  double Value(std::span<const double> t, std::size_t label) const;
  // E_{y ~ p} l(t, y).
  double ExpectedValue(std::span<const double> t,
                       std::span<const double> p) const;
  std::vector<double> DiscreteDerivative(std::span<const double> t) const;

 protected:
  GlmLoss(std::size_t k, double scale);

 private:
  std::size_t k_;
  double scale_;
};

using GlmLossPtr = std::shared_ptr<const GlmLoss>;

GlmLossPtr MakeCrossEntropy(std::size_t k);  // log-sum-exp, 1/(log k + 2)
GlmLossPtr MakeBrierGlm(std::size_t k);      // conjugate of |p|^2/2, 1/2
GlmLossPtr MakeMaxLinear(std::size_t k);     // max_i t_i, 1/2
GlmLossPtr MakeMulticlassLoss(const std::string& id, std::size_t k);
std::vector<GlmLossPtr> MulticlassLossBank(std::size_t k);

// Euclidean projection onto the simplex.
std::vector<double> ProjectToSimplex(std::span<const double> v);

// Binary GLM loss l(t, y) = scale * (omega(t) - t y), t in [-1,1],
// y in {0,1}, omega' in [0,1]. p is the probability of y = 1.
class BinaryLoss {
 public:
  virtual ~BinaryLoss() = default;
  virtual std::string id() const = 0;
  double scale() const { return scale_; }
  virtual double Omega(double t) const = 0;
  virtual double Link(double t) const = 0;  // omega'
  virtual double ExAnte(double p) const = 0;

  double Value(double t, int y) const;
  double ExpectedValue(double t, double p) const;
  double DiscreteDerivative(double t) const { return -scale_ * t; }

 protected:
  explicit BinaryLoss(double scale) : scale_(scale) {}

 private:
  double scale_;
};

using BinaryLossPtr = std::shared_ptr<const BinaryLoss>;

BinaryLossPtr MakeSquaredBinary();  // equals (p - y)^2 at t = 2p - 1
BinaryLossPtr MakeLogBinary();      // softplus, scale 1/(log 2 + 2)
// omega(t) = s t; at t = sign(p - s) this is exactly the threshold loss.
BinaryLossPtr MakeThresholdBinary(double s);
BinaryLossPtr MakeBinaryLoss(const std::string& id);
std::vector<BinaryLossPtr> BinaryLossBank();

// -|p - s| + (p - y) sign(p - s), sign(0) = 1.
double ThresholdValue(double s, double p, int y);

// [l(t, e_i) - shift]_i for an arbitrary loss.
using LossFunction =
    std::function<double(std::span<const double> t, std::size_t label)>;
std::vector<double> DiscreteDerivativeOf(const LossFunction& loss,
                                         std::span<const double> t,
                                         std::size_t k, double shift = 0.0);

// Convex piecewise-linear psi on [0,1]: psi(0) plus slopes between sorted
// breakpoints (slopes.size() == breakpoints.size() + 1).
struct PiecewiseLinear {
  double value_at_zero = 0.0;
  std::vector<double> breakpoints;
  std::vector<double> slopes;

  double Value(double p) const;
  double RightSlope(double p) const;  // matches sign(0) = 1
  static PiecewiseLinear Interpolate(const std::function<double(double)>& f,
                                     std::size_t intervals);
};

// l(p, y) = -psi(p) + psi'(p) (p - y).
double ProperLossFromPotential(const PiecewiseLinear& psi, double p, int y);

// l(p, y) = a y + b + sum_i weight_i l_{s_i}(p, y), weight_i = jump_i / 2.
struct ProperDecomposition {
  std::vector<double> breakpoints;
  std::vector<double> jumps;    // slope jumps, >= 0
  std::vector<double> weights;  // jump / 2
  double a = 0.0;
  double b = 0.0;

  double Value(double p, int y) const;
  // Threshold weight plus |a| once a y is folded into the s = 0 or s = 1 loss.
  double FoldedWeight() const;
};

ProperDecomposition DecomposeProper(const PiecewiseLinear& psi);

}  // namespace omnipred
