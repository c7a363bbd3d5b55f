#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "omnipred/approach.h"
#include "omnipred/rng.h"

namespace omnipred {

// ---- two sets that are each approachable but not simultaneously ---------

// Actions are distributions on {0, 1}; v(a, b) = a_coord, U = {1}.
class CoordinatePayoffSet final : public PayoffSet {
 public:
  explicit CoordinatePayoffSet(std::size_t coord) : coord_(coord) {}
  std::string id() const override { return "v" + std::to_string(coord_ + 1); }
  double width() const override { return 1.0; }
  double Pairing(const MixedAction& a, std::size_t label,
                 std::span<const double> x) const override;
  void Observe(const MixedAction& a, std::size_t label,
               std::span<const double> x) override;
  double SupAverage() const override;
  double RegretBound(std::size_t) const override { return 0.0; }
  std::size_t rounds() const override { return t_; }

 private:
  std::size_t coord_;
  double sum_ = 0.0;
  std::size_t t_ = 0;
};

struct ImpossibilityReport {
  std::size_t rounds = 0;
  double avg_v1 = 0.0;
  double avg_v2 = 0.0;
  double sum = 0.0;  // always 1
  double max = 0.0;  // always >= 1/2
  // min over a of (v1 + v2) / 2 at w = (1/2, 1/2): no oracle beats this.
  double mixture_value = 0.5;
  // Each set alone, approached by constant play through the driver.
  double alone_v1 = 0.0;
  double alone_v2 = 0.0;
};

// Averages for a supplied action sequence (each entry a point of the
// 2-simplex), plus the single-set runs of length actions.size().
ImpossibilityReport DemoMlooImpossibility(
    std::span<const std::array<double, 2>> actions);
// Random action sequence of length T.
ImpossibilityReport DemoMlooImpossibility(std::size_t T, Rng& rng);

// ---- isotonic regression under cyclic monotonicity ---------------------

enum class IsotonicLoss { kSquared, kLog };
std::string IsotonicLossName(IsotonicLoss loss);

struct IsotonicInstance {
  std::vector<std::vector<double>> v;  // n points in R^k
  std::vector<std::size_t> y;          // label classes
  IsotonicLoss loss = IsotonicLoss::kSquared;
};

// v = [[0,0,0], [1,0,0]], y = [e1, e2].
IsotonicInstance CanonicalIsotonicInstance(IsotonicLoss loss);

struct IsotonicSolution {
  std::vector<std::vector<double>> p;
  std::vector<double> f;
  double objective = 0.0;
  double t = 0.0;  // shared coordinate in the one-parameter family
  double max_violation = 0.0;
  double derivative = 0.0;  // central difference of the scalar objective
};

// sum_i l(p_i, y_i); squared is (1/2)|p - y|^2, log is -log p_y.
double IsotonicObjective(const IsotonicInstance& inst,
                         const std::vector<std::vector<double>>& p);
// max over (i, j) of <p_j, v_i - v_j> - (f_i - f_j), floored at 0.
double MaxCyclicViolation(const std::vector<std::vector<double>>& v,
                          const std::vector<std::vector<double>>& p,
                          const std::vector<double>& f);

// Certified for n = 2, k = 3 with v_1 = v_2 or v_1 - v_2 = -e_c (or its
// mirror), labels distinct vertices with y_1 = e_c. Golden-section search on
// the shared coordinate t. Other inputs throw ConfigError.
IsotonicSolution SolveIsotonic(const IsotonicInstance& inst,
                               double tol = 1e-10);

struct IsotonicVerification {
  bool pass = false;
  double first_t = 0.0;
  double second_t = 0.0;
  double matrix_error = 0.0;  // first minimizer vs the 3/7 matrix, max abs
  double t_margin = 0.0;      // |second_t - first_t|
  double candidate_log = 0.0;     // log objective at ((1/2,1/4,1/4),(1/2,1/2,0))
  double first_min_log = 0.0;     // log objective at the first minimizer
  bool candidate_beats = false;
};

// Pass iff the first loss's minimizer matches the 3/7 matrix within
// matrix_tol and the second's t differs by more than t_tol.
IsotonicVerification VerifyIsotonicCounterexample(
    double matrix_tol = 1e-6, double t_tol = 1e-3, double solver_tol = 1e-10,
    IsotonicLoss first = IsotonicLoss::kSquared,
    IsotonicLoss second = IsotonicLoss::kLog);

}  // namespace omnipred
