#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "omnipred/core.h"
#include "omnipred/losses.h"
#include "omnipred/simplex_net.h"

namespace omnipred {

// ---- comparators ----------------------------------------------------------

enum class FeatureMap { kIdentity, kSquare };

FeatureMap ParseFeatureMap(const std::string& name);
std::string FeatureMapName(FeatureMap map);
// Coordinatewise; both maps keep |phi(x)|_2 <= |x|_2 <= 1.
std::vector<double> ApplyFeatureMap(FeatureMap map, std::span<const double> x);

// t(x) = C phi(x) with every row of C in the unit ball, so t in [-1, 1]^k.
// Binary comparators have one row and predict the scalar t.
struct LinearComparator {
  Eigen::MatrixXd c;
  FeatureMap map = FeatureMap::kIdentity;
  std::string name;

  std::vector<double> Apply(std::span<const double> x) const;
};

// Projects every row onto the unit ball.
void ProjectRows(Eigen::MatrixXd& c);

struct ErmOptions {
  std::size_t iterations = 200;
};

// Projected gradient descent on the average GLM loss from C = 0, step
// 1/scale; returns the best iterate seen.
LinearComparator FitErm(const GlmLoss& loss, std::span<const Example> data,
                        FeatureMap map, const ErmOptions& options = {});
LinearComparator FitErmBinary(const BinaryLoss& loss,
                              std::span<const Example> data, FeatureMap map,
                              const ErmOptions& options = {});

// ---- calibration and multiaccuracy ----------------------------------------

struct ThreshCal {
  double one_sided = 0.0;  // max_s (1/T) sum (p - y) sign(p - s)
  double absolute = 0.0;   // max_s |...|
  double argmax = 0.0;
};

// Thresholds range over `grid`; sign(0) = 1.
ThreshCal ThreshCalibration(std::span<const double> preds,
                            std::span<const int> labels,
                            std::span<const double> grid);

// (1/T) sum_s |sum_{t: p_t = s} (s - e_{y_t})|_1, the sup over the box.
double LinfCalibration(const SimplexNet& net,
                       std::span<const std::size_t> preds,
                       std::span<const std::size_t> labels);

// (1/T) sum_i |sum_t (p_t - e_{y_t})_i phi(x_t)|_2 for predictions given as
// rows of `preds` (T x k).
double LinearMultiaccuracy(const Eigen::MatrixXd& preds,
                           std::span<const std::size_t> labels,
                           std::span<const Example> data,
                           FeatureMap map = FeatureMap::kIdentity);
// (1/T) |sum_t (p_t - y_t) phi(x_t)|_2.
double BinaryLinearMultiaccuracy(std::span<const double> preds,
                                 std::span<const int> labels,
                                 std::span<const Example> data,
                                 FeatureMap map = FeatureMap::kIdentity);

// ---- omniprediction gaps --------------------------------------------------

// For one loss: gap = mean l(k*(p), y) - min_c mean l(c(x), y). The recipe
// terms bound it on the trace: for every comparator c,
//   mean l(k*(p), y) - mean l(c(x), y) <= ma(c) + cal_w
// with ma(c) = mean <d(c(x)), p - y> and cal_w = mean <-d(k*(p)), p - y>.
struct GapReport {
  std::string loss_id;
  double predictor_loss = 0.0;
  double benchmark_loss = 0.0;
  std::string best_comparator;
  double gap = 0.0;
  double recipe_ma = 0.0;     // max over benchmark comparators of ma(c)
  double recipe_cal_w = 0.0;  // calibration against -d o k*
  double ma_sup = 0.0;        // closed-form sup over the comparator class
};

GapReport OmniGap(const GlmLoss& loss, const Eigen::MatrixXd& preds,
                  std::span<const std::size_t> labels,
                  std::span<const Example> data,
                  std::span<const LinearComparator> benchmark);
GapReport BinaryOmniGap(const BinaryLoss& loss, std::span<const double> preds,
                        std::span<const int> labels,
                        std::span<const Example> data,
                        std::span<const LinearComparator> benchmark);

// ---- reports --------------------------------------------------------------

struct MetricsReport {
  std::string kind;  // binary | multiclass
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  double eps = 0.0;
  double budget = 0.0;   // guarantee constant times eps
  double calibration = 0.0;       // thresh_cal or linf_cal, one-sided
  double calibration_abs = 0.0;
  std::map<std::string, double> multiaccuracy;  // per comparator family
  std::vector<GapReport> gaps;
  std::map<std::string, double> diagnostics;
  std::string config_json = "{}";

  double MaxGap() const;
  double MaxMultiaccuracy() const;
};

}  // namespace omnipred
