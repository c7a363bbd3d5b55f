#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "omnipred/core.h"
#include "omnipred/learners.h"
#include "omnipred/oracles.h"
#include "omnipred/rng.h"
#include "omnipred/simplex_net.h"

namespace omnipred {

// One approachability set: a payoff map v(a, b), a distinguisher class U
// learned online, and the width bound |<u(x), v(a, b)>| <= L.
class PayoffSet {
 public:
  virtual ~PayoffSet() = default;
  virtual std::string id() const = 0;
  virtual double width() const = 0;

  // <u_t(x), v(a, label)> for the learner's current distinguisher.
  virtual double Pairing(const MixedAction& a, std::size_t label,
                         std::span<const double> x) const = 0;
  // Shows v(a, label) to the learner and adds it to the running sum.
  virtual void Observe(const MixedAction& a, std::size_t label,
                       std::span<const double> x) = 0;
  // sup over U of <u, sum_t v(a_t, b_t)>, divided by the rounds observed.
  virtual double SupAverage() const = 0;
  // Regret bound reg(T) of the learner for the bound report.
  virtual double RegretBound(std::size_t horizon) const = 0;
  virtual std::size_t rounds() const = 0;
};

// Sets whose payoff is M v(a, b) with v(a, b) = {a_s (s - b)}_s over a net;
// the oracle only needs the adjoint of M applied to the distinguisher.
class NetPayoffSet : public PayoffSet {
 public:
  // Current learner iterate; snapshots of it replay the distinguisher later.
  virtual std::span<const double> LearnerPoint() const = 0;
  // field (|N| x dim) += weight * M^* u(x) for the distinguisher encoded by
  // `point`. dim is 1 on the binary grid and k on a simplex net.
  virtual void AddAdjointAt(std::span<const double> point, double weight,
                            std::span<const double> x,
                            Eigen::Ref<Eigen::MatrixXd> field) const = 0;
  void AddAdjoint(double weight, std::span<const double> x,
                  Eigen::Ref<Eigen::MatrixXd> field) const {
    AddAdjointAt(LearnerPoint(), weight, x, field);
  }
};

class Oracle {
 public:
  virtual ~Oracle() = default;
  // Mixed action whose w-weighted payoff is <= eps() against every label.
  virtual MixedAction Respond(std::span<const double> w,
                              std::span<const double> x, Rng& rng) = 0;
  virtual double eps() const = 0;
};

// Algorithm-3 style oracle on an ascending binary grid.
class BinaryNetOracle final : public Oracle {
 public:
  BinaryNetOracle(std::vector<double> grid, std::vector<NetPayoffSet*> sets);
  MixedAction Respond(std::span<const double> w, std::span<const double> x,
                      Rng& rng) override;
  double eps() const override;
  const std::vector<double>& last_field() const { return field_; }

 private:
  std::vector<double> grid_;
  std::vector<NetPayoffSet*> sets_;
  std::vector<double> field_;
};

// Game-solving oracle over a simplex net; guarantee 2 eps R.
class MulticlassNetOracle final : public Oracle {
 public:
  MulticlassNetOracle(const SimplexNet& net, std::vector<NetPayoffSet*> sets,
                      double r = 1.0, GameSolverOptions options = {});
  MixedAction Respond(std::span<const double> w, std::span<const double> x,
                      Rng& rng) override;
  double eps() const override { return 2.0 * net_.eps() * r_; }
  double last_solver_gap() const { return last_gap_; }

 private:
  const SimplexNet& net_;
  std::vector<NetPayoffSet*> sets_;
  double r_;
  GameSolverOptions options_;
  double last_gap_ = 0.0;
};

enum class ApproachMode {
  kDeterministic,  // play the mixture a_t itself
  kSampled,        // play p_t ~ a_t and feed back the realized payoff
};

struct ApproachOptions {
  ApproachMode mode = ApproachMode::kSampled;
  std::size_t horizon = 0;  // 0: use the stream length
  double eta = -1.0;        // MWU step; negative: the mode's default
  bool keep_log = true;
  // If > 0, record max over labels of the w-mixed payoff each round.
  std::size_t num_labels = 0;
  // Called at the start of each round with the MWU weights, before the
  // oracle runs; used to snapshot learner iterates.
  std::function<void(std::size_t t, std::span<const double> w)> before_round;
};

struct RoundRecord {
  std::size_t t = 0;
  std::vector<double> w;
  std::vector<double> gains;       // realized g~
  std::vector<double> mean_gains;  // E over the oracle's mixture
  MixedAction action;
  long played = -1;  // sampled index, -1 in deterministic mode
  std::size_t label = 0;
  double oracle_payoff = 0.0;
};

struct ApproachState {
  std::size_t t = 0;
  MwuState mwu;
  std::vector<std::string> set_ids;
  std::vector<double> gain_sums;
  std::vector<double> mean_gain_sums;
  std::vector<long> played;  // per round, the index fed to the learners
  std::vector<MixedAction> actions;
  double max_oracle_payoff = -std::numeric_limits<double>::infinity();
  std::vector<RoundRecord> log;
};

// Runs the coupled protocol: oracle on the MWU mixture of distinguishers,
// action chosen before the label, then learners and MWU are updated.
ApproachState RunApproach(std::span<PayoffSet* const> sets, Oracle& oracle,
                          std::span<const Example> stream,
                          const ApproachOptions& options, Rng& rng);

struct AveragePayoff {
  double sup = 0.0;              // sup over the set's class
  double learner_average = 0.0;  // (1/T) sum of realized gains
};

AveragePayoff AveragePayoffOf(const ApproachState& state,
                              std::span<PayoffSet* const> sets,
                              const std::string& id);

// rho + eps + (reg_i(T) + L sqrt(2 T log m)) / T for set i.
double ApproachBound(const ApproachState& state, const PayoffSet& set,
                     double rho, double oracle_eps, double width,
                     std::size_t num_sets);

void WriteRoundLogJsonl(const ApproachState& state, std::ostream& out);

}  // namespace omnipred
