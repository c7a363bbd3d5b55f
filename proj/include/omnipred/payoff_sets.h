#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "omnipred/approach.h"
#include "omnipred/eval.h"
#include "omnipred/learners.h"
#include "omnipred/simplex_net.h"

namespace omnipred {

struct SetOptions {
  std::size_t horizon = 1;
  double eps = 0.1;
  bool statistical = false;
  double delta = 0.01;
};

// Threshold calibration on a binary grid: u is a distribution over
// thresholds s, v_s(a, b) = sum_p a_p (p - b) sign(p - s). Learned by MWU.
class BinaryCalibrationSet final : public NetPayoffSet {
 public:
  BinaryCalibrationSet(std::vector<double> grid, const SetOptions& options);
  std::string id() const override { return "calibration"; }
  double width() const override { return 1.0; }
  double Pairing(const MixedAction& a, std::size_t label,
                 std::span<const double> x) const override;
  void Observe(const MixedAction& a, std::size_t label,
               std::span<const double> x) override;
  double SupAverage() const override;
  double RegretBound(std::size_t horizon) const override;
  std::size_t rounds() const override { return t_; }
  std::span<const double> LearnerPoint() const override {
    return learner_.Point();
  }
  void AddAdjointAt(std::span<const double> point, double weight,
                    std::span<const double> x,
                    Eigen::Ref<Eigen::MatrixXd> field) const override;

 private:
  std::vector<double> Gain(const MixedAction& a, std::size_t label) const;
  std::vector<double> grid_;
  SetOptions options_;
  MwuLearner learner_;
  std::vector<double> sums_;
  std::size_t t_ = 0;
};

// Linear multiaccuracy for binary prediction: u(x) = -<c, phi(x)> with c in
// the unit ball, v(a, b) = E_{p~a} p - b. Learned by projected gradient.
class BinaryMultiaccuracySet final : public NetPayoffSet {
 public:
  BinaryMultiaccuracySet(std::vector<double> grid, std::size_t d,
                         FeatureMap map, const SetOptions& options);
  std::string id() const override { return "multiaccuracy_" + FeatureMapName(map_); }
  double width() const override { return 1.0; }
  double Pairing(const MixedAction& a, std::size_t label,
                 std::span<const double> x) const override;
  void Observe(const MixedAction& a, std::size_t label,
               std::span<const double> x) override;
  double SupAverage() const override;
  double RegretBound(std::size_t horizon) const override;
  std::size_t rounds() const override { return t_; }
  std::span<const double> LearnerPoint() const override {
    return learner_.Point();
  }
  void AddAdjointAt(std::span<const double> point, double weight,
                    std::span<const double> x,
                    Eigen::Ref<Eigen::MatrixXd> field) const override;
  FeatureMap map() const { return map_; }

 private:
  double Residual(const MixedAction& a, std::size_t label) const;
  std::vector<double> grid_;
  FeatureMap map_;
  SetOptions options_;
  PgdLearner learner_;
  Eigen::VectorXd sum_;
  std::size_t t_ = 0;
};

// Box calibration on a simplex net: u in [-1,1]^{N x k},
// v(a, b) = {a_s (s - e_b)}_s. Learned by projected gradient on the box.
class MulticlassCalibrationSet final : public NetPayoffSet {
 public:
  MulticlassCalibrationSet(const SimplexNet& net, const SetOptions& options);
  std::string id() const override { return "calibration"; }
  double width() const override { return 2.0; }
  double Pairing(const MixedAction& a, std::size_t label,
                 std::span<const double> x) const override;
  void Observe(const MixedAction& a, std::size_t label,
               std::span<const double> x) override;
  double SupAverage() const override;
  double RegretBound(std::size_t horizon) const override;
  std::size_t rounds() const override { return t_; }
  std::span<const double> LearnerPoint() const override {
    return learner_.Point();
  }
  void AddAdjointAt(std::span<const double> point, double weight,
                    std::span<const double> x,
                    Eigen::Ref<Eigen::MatrixXd> field) const override;

 private:
  const SimplexNet& net_;
  SetOptions options_;
  PgdLearner learner_;
  std::vector<double> sums_;  // N x k, row-major
  std::vector<double> gain_;
  std::size_t t_ = 0;
};

// Linear multiaccuracy for multiclass prediction: u(x) = -C phi(x) with the
// rows of C in the unit ball, v(a, b) = E_{p~a} p - e_b.
class MulticlassMultiaccuracySet final : public NetPayoffSet {
 public:
  MulticlassMultiaccuracySet(const SimplexNet& net, std::size_t d,
                             FeatureMap map, const SetOptions& options,
                             std::string id_suffix = "");
  std::string id() const override { return id_; }
  double width() const override { return 2.0; }
  double Pairing(const MixedAction& a, std::size_t label,
                 std::span<const double> x) const override;
  void Observe(const MixedAction& a, std::size_t label,
               std::span<const double> x) override;
  double SupAverage() const override;
  double RegretBound(std::size_t horizon) const override;
  std::size_t rounds() const override { return t_; }
  std::span<const double> LearnerPoint() const override {
    return learner_.Point();
  }
  void AddAdjointAt(std::span<const double> point, double weight,
                    std::span<const double> x,
                    Eigen::Ref<Eigen::MatrixXd> field) const override;
  FeatureMap map() const { return map_; }

 private:
  Eigen::VectorXd Residual(const MixedAction& a, std::size_t label) const;
  Eigen::VectorXd Distinguisher(std::span<const double> point,
                                std::span<const double> x) const;
  const SimplexNet& net_;
  std::size_t d_;
  FeatureMap map_;
  SetOptions options_;
  std::string id_;
  PgdLearner learner_;
  Eigen::MatrixXd sum_;  // k x d
  std::size_t t_ = 0;
};

}  // namespace omnipred
