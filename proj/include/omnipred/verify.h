#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace omnipred {

// Outcome of a randomized property check. `margin` is the smallest slack
// (bound minus observed) over all trials; negative means a failure.
struct SuiteResult {
  std::string name;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double margin = 0.0;
  bool pass() const { return failures == 0; }
};

// Random calibration/multiaccuracy mixtures on the binary grid; payoff at
// both labels must stay <= eps.
SuiteResult BinaryOracleSuite(std::size_t trials, double eps,
                              std::uint64_t seed);
// Random field mixtures on the k-class net with R = 1; mixture payoff at
// every label vertex must stay <= 2 eps + solver gap.
SuiteResult MulticlassOracleSuite(std::size_t k, double eps,
                                  std::size_t trials, std::uint64_t seed);
// Random matrices; the returned column strategy must be certified to eps by
// the solver's upper and lower bounds.
SuiteResult GameSolverSuite(std::size_t trials, double eps,
                            std::uint64_t seed);

// The default suite set run by the `verify` command.
std::vector<SuiteResult> RunOracleSuites(std::uint64_t seed);

}  // namespace omnipred
