#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "omnipred/core.h"
#include "omnipred/rng.h"
#include "omnipred/simplex_net.h"

namespace omnipred {

// ---- binary contextual oracle -------------------------------------------

struct BinaryOracleInput {
  double q = 1.0;         // weight on the calibration set
  double r = 0.0;         // weight on the multiaccuracy set
  std::vector<double> u;  // calibration distinguisher, a distribution on grid
  double d = 0.0;         // multiaccuracy value d_l(c(x)) in [-1, 1]
};

// h(p) = sum_s u_s sign(p - s) at every grid point p.
std::vector<double> ThresholdField(std::span<const double> u,
                                   std::span<const double> grid);

// Case analysis on h over an ascending grid: mass at 0 if h(0) >= 0, mass at
// 1 if h(1) <= 0, else the two-point mixture at the first adjacent sign
// change with weights |h(p')| : |h(p)|.
MixedAction BinaryCmlooFromField(std::span<const double> h,
                                 std::span<const double> grid);
MixedAction BinaryCmloo(const BinaryOracleInput& input,
                        std::span<const double> grid);

// sum_p a_p h(p) (p - b).
double BinaryMixturePayoff(const MixedAction& a, std::span<const double> h,
                           std::span<const double> grid, int b);

// ---- matrix games ---------------------------------------------------------

struct GameSolverOptions {
  std::size_t max_iterations = 5'000'000;
  // Duality gap at which the multiclass oracle stops; 0 means the net's eps.
  double tolerance = 0.0;
};

struct GameSolution {
  std::vector<double> column;  // minimizer's mixed strategy
  std::vector<double> row;     // averaged maximizer strategy
  double upper = 0.0;          // max_i (M a)_i
  double lower = 0.0;          // min_j (b^T M)_j
  std::size_t iterations = 0;
  double gap() const { return upper - lower; }
  double value() const { return 0.5 * (upper + lower); }
};

// min over columns a, max over rows b of b^T M a to additive eps. Rows play
// exponential weights, columns best-respond; averaged plays are returned once
// the duality gap certificate is <= eps.
GameSolution SolveMatrixGame(const Eigen::MatrixXd& m, double eps, Rng& rng,
                             const GameSolverOptions& options = {});

struct GameMatrix {
  Eigen::MatrixXd m;      // k x |N|, entries in [-2, 2]
  Eigen::MatrixXd field;  // |N| x k, the normalized f (row s is f_s / R)
  Eigen::VectorXd g;      // g_s = <f_s, s>
  double r = 1.0;
};

// M = 1_k g^T - F after dividing f by R; M(i, s) = <f_s, s - e_i>.
GameMatrix BuildGameMatrix(const Eigen::MatrixXd& field, const SimplexNet& net,
                           double r);

// ---- multiclass oracle ----------------------------------------------------

// Adds weight * (M^(i))^* u^(i) into an |N| x k field.
using AdjointApplier =
    std::function<void(double weight, Eigen::Ref<Eigen::MatrixXd> field)>;

struct MlooResult {
  MixedAction action;
  Eigen::MatrixXd field;  // assembled f, unnormalized
  double solver_gap = 0.0;
  std::size_t solver_iterations = 0;
};

MlooResult MulticlassMloo(std::span<const double> w,
                          std::span<const AdjointApplier> appliers,
                          const SimplexNet& net, double r, Rng& rng,
                          const GameSolverOptions& options = {});
MlooResult MulticlassMlooFromField(Eigen::MatrixXd field,
                                   const SimplexNet& net, double r, Rng& rng,
                                   const GameSolverOptions& options = {});

// sum_s a_s <f_s, s - e_label>.
double MixturePayoff(const MixedAction& a, const Eigen::MatrixXd& field,
                     const SimplexNet& net, std::size_t label);

}  // namespace omnipred
