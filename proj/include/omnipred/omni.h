#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omnipred/approach.h"
#include "omnipred/datagen.h"
#include "omnipred/eval.h"
#include "omnipred/oracles.h"
#include "omnipred/payoff_sets.h"
#include "omnipred/simplex_net.h"

namespace omnipred {

struct PipelineConfig {
  std::size_t k = 2;
  std::size_t d = 0;  // 0: taken from the data
  double eps = 0.1;
  std::size_t horizon = 0;  // 0: default horizon
  double delta = 0.01;
  double c1 = 1.0;
  double c2 = 1.0;
  std::vector<std::string> losses;  // empty: the whole bank
  std::vector<std::string> families = {"identity"};
  std::uint64_t seed = 0;
  std::size_t max_net_points = 250000;
  std::size_t erm_iterations = 200;
  bool compute_gaps = true;  // skip the ERM benchmark when false
  // Game-solver stopping gap for the multiclass oracle; 0 means eps.
  double solver_tolerance = 0.0;
  bool keep_log = false;
  // Added to every loss's benchmark (e.g. the generator's truth).
  std::vector<LinearComparator> extra_comparators;
};

// ceil(c1 k (1/eps)^(k+1) + c2 eps^-2 log(1/delta)).
std::size_t DefaultMulticlassHorizon(std::size_t k, double eps, double delta,
                                     double c1 = 1.0, double c2 = 1.0);
// ceil(c1 log(1/(delta eps)) / eps^2).
std::size_t DefaultBinaryHorizon(double eps, double delta, double c1 = 1.0);

// cfg.horizon, or the default horizon when it is 0. Validates eps and delta.
std::size_t ResolveHorizon(const PipelineConfig& cfg, bool binary);

enum class PipelineKind {
  kBinaryOnline,
  kBinaryStatistical,
  kMulticlassOnline,
  kMulticlassStatistical
};
// Constant in front of eps in the omniprediction guarantee.
double GuaranteeBudgetFactor(PipelineKind kind);

// The generator's comparator when it lies in the linear class.
std::optional<LinearComparator> TruthComparator(const StreamSpec& spec);

// ---- metrics on a finished trace ----------------------------------------

MetricsReport EvaluateBinary(std::span<const double> preds,
                             std::span<const Example> data,
                             std::span<const double> grid,
                             const PipelineConfig& cfg);
MetricsReport EvaluateMulticlass(const SimplexNet& net,
                                 std::span<const std::size_t> preds,
                                 std::span<const Example> data,
                                 const PipelineConfig& cfg);

// ---- online pipelines -------------------------------------------------------

struct BinaryRun {
  std::vector<double> grid;
  std::vector<std::size_t> pred_index;
  std::vector<double> preds;  // P(y = 1) on the grid
  MetricsReport report;
  ApproachState state;
};

struct MulticlassRun {
  std::shared_ptr<const SimplexNet> net;
  std::vector<std::size_t> pred_index;
  MetricsReport report;
  ApproachState state;
};

// Predictions are sampled from the oracle's mixture before each label.
BinaryRun FitOnlineBinary(std::span<const Example> stream,
                          const PipelineConfig& cfg);
// Linear comparators only; same as FitUnion with families = {identity}.
MulticlassRun FitOnlineMulticlass(std::span<const Example> stream,
                                  const PipelineConfig& cfg);
// One multiaccuracy set per entry of cfg.families plus box calibration.
MulticlassRun FitUnion(std::span<const Example> stream,
                       const PipelineConfig& cfg);

// ---- statistical pipelines ------------------------------------------------

// Randomized predictor: pick a round t uniformly, rebuild that round's
// oracle mixture at x from stored learner iterates, and sample from it.
class StatPredictor {
 public:
  struct Snapshot {
    std::vector<double> w;
    std::vector<std::vector<double>> points;  // one per payoff set
  };

  bool binary() const { return binary_; }
  std::size_t k() const { return net_->k(); }
  std::size_t rounds() const { return snapshots_.size(); }
  const SimplexNet& net() const { return *net_; }
  const std::vector<double>& grid() const { return grid_; }
  double oracle_eps() const;

  // a_t(x); deterministic for a fixed t.
  MixedAction MixtureAt(std::size_t t, std::span<const double> x) const;
  std::size_t PredictIndex(std::span<const double> x, Rng& rng) const;
  // P(class 1) for binary predictors.
  double PredictBinary(std::span<const double> x, Rng& rng) const;
  // E over t and the mixture; exact, costs one oracle call per round.
  std::vector<double> MeanPrediction(std::span<const double> x) const;

  const ApproachState& training_state() const { return state_; }
  MetricsReport training_report;

 private:
  friend StatPredictor FitStatisticalBinary(std::span<const Example>,
                                            const PipelineConfig&);
  friend StatPredictor FitStatisticalMulticlass(std::span<const Example>,
                                                const PipelineConfig&);
  bool binary_ = true;
  std::uint64_t seed_ = 0;
  std::shared_ptr<const SimplexNet> net_;
  std::vector<double> grid_;
  std::vector<std::unique_ptr<NetPayoffSet>> sets_;
  std::vector<Snapshot> snapshots_;
  GameSolverOptions solver_;
  ApproachState state_;
};

// One fresh example per round; throws ConfigError if `samples` runs out.
StatPredictor FitStatisticalBinary(std::span<const Example> samples,
                                   const PipelineConfig& cfg);
StatPredictor FitStatisticalMulticlass(std::span<const Example> samples,
                                       const PipelineConfig& cfg);

// Population metrics estimated on held-out data, one prediction per example.
MetricsReport EvaluateStatistical(const StatPredictor& predictor,
                                  std::span<const Example> heldout,
                                  const PipelineConfig& cfg, Rng& rng);

}  // namespace omnipred
