#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace omnipred {

// Exponential weights over m arms. Weights are kept via normalized log-weights
// so long horizons do not underflow.
struct MwuState {
  std::vector<double> weights;
  std::vector<double> log_weights;  // max entry is 0
  double eta = 0.0;
  double gain_bound = 1.0;  // L
  std::size_t t = 0;
};

MwuState MakeMwu(std::size_t m, double eta, double gain_bound);
// Rejects gains with |g_i| > gain_bound.
MwuState MwuUpdate(const MwuState& state, std::span<const double> gains);

// (1/L) sqrt(2 log m / T); with `sampled`, T is replaced by 5T.
double MwuStepSize(std::size_t m, double gain_bound, std::size_t horizon,
                   bool sampled = false);

enum class FeasibleKind { kBox, kBall, kRowBall };

struct FeasibleSet {
  FeasibleKind kind = FeasibleKind::kBox;
  std::size_t dim = 0;
  double radius = 1.0;  // box half-width or ball radius
  std::size_t rows = 0;  // row-ball only; storage is row-major
  std::size_t cols = 0;

  static FeasibleSet Box(std::size_t dim);
  static FeasibleSet Ball(std::size_t dim, double radius = 1.0);
  static FeasibleSet RowBall(std::size_t rows, std::size_t cols);

  void Project(std::span<double> x) const;
  bool Contains(std::span<const double> x, double tol = 1e-12) const;
  // Norm bound on gains under which the regret bounds are stated.
  double DefaultGainBound() const;
  // sup over the set of <u, g>.
  double Support(std::span<const double> g) const;
};

struct PgdState {
  std::vector<double> point;
  FeasibleSet set;
  double eta = 0.0;
  double gain_bound = 0.0;  // Euclidean norm bound
  std::size_t t = 0;
};

PgdState MakePgd(const FeasibleSet& set, double eta, double gain_bound = -1.0);
// point <- project(point + eta * gain).
PgdState PgdUpdate(const PgdState& state, std::span<const double> gain);

// Step sizes that realize the closed-form bounds.
double BoxStepSize(double eps);                            // eps / 2
double BallStepSize(std::size_t horizon, double radius = 1.0);  // r / sqrt(T)
double RowBallStepSize(std::size_t rows, std::size_t horizon);  // sqrt(k/T)/2

// Online learner as used by the approachability driver: it plays Point()
// and is then shown a gain vector it wants to have been aligned with.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::size_t dim() const = 0;
  virtual std::span<const double> Point() const = 0;
  virtual void Observe(std::span<const double> gain) = 0;
  virtual std::string name() const = 0;
};

class MwuLearner : public Learner {
 public:
  MwuLearner(std::size_t m, double eta, double gain_bound)
      : state_(MakeMwu(m, eta, gain_bound)) {}
  std::size_t dim() const override { return state_.weights.size(); }
  std::span<const double> Point() const override { return state_.weights; }
  void Observe(std::span<const double> gain) override {
    state_ = MwuUpdate(state_, gain);
  }
  std::string name() const override { return "mwu"; }
  const MwuState& state() const { return state_; }

 private:
  MwuState state_;
};

class PgdLearner : public Learner {
 public:
  PgdLearner(const FeasibleSet& set, double eta, double gain_bound = -1.0)
      : state_(MakePgd(set, eta, gain_bound)) {}
  std::size_t dim() const override { return state_.point.size(); }
  std::span<const double> Point() const override { return state_.point; }
  void Observe(std::span<const double> gain) override {
    state_ = PgdUpdate(state_, gain);
  }
  std::string name() const override;
  const PgdState& state() const { return state_; }

 private:
  PgdState state_;
};

enum class RegretKind {
  kMwu,                    // L sqrt(2 T log m)
  kPgdBall,                // r L sqrt(T)
  kPgdRowBall,             // 2 sqrt(k T)
  kPgdBox,                 // eps T + k|N| / eps
  kBinaryCalibration,      // sqrt(2 T log(1/eps + 2))
  kHighProbability,        // 4 L sqrt(T theta) + 16 L R sqrt(T log(2/delta))
  kStatBoxCalibration,     // eps T + 10 k|N| / eps + 32 sqrt(T log(2/delta))
  kStatBinaryCalibration,  // 20 sqrt(T log(4 / (delta eps)))
  kStatLinearBinary,       // 20 sqrt(T log(2/delta))
  kStatLinearMulticlass,   // 40 sqrt(k T log(2/delta))
};

struct RegretParams {
  double gain_bound = 1.0;   // L
  std::size_t arms = 2;      // m
  double eps = 0.1;
  std::size_t k = 2;
  std::size_t net_size = 1;  // |N|
  double radius = 1.0;       // R (ball radius or dual diameter)
  double theta = 1.0;        // regularizer range
  double delta = 0.1;
};

RegretKind ParseRegretKind(const std::string& name);
double TheoreticalRegret(RegretKind kind, std::size_t horizon,
                         const RegretParams& params);

}  // namespace omnipred
