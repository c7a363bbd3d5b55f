#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "omnipred/core.h"
#include "omnipred/rng.h"

namespace omnipred {

enum class StreamKind {
  kSoftmaxLinear,           // y ~ softmax(C* x)
  kLogisticBinary,          // y ~ Bernoulli(sigmoid(<c*, x>)), k = 2
  kFixedMarginal,           // y ~ q, independent of x
  kAdversarialAlternating,  // y_t = t mod k
};

StreamKind ParseStreamKind(const std::string& name);
std::string StreamKindName(StreamKind kind);

struct StreamSpec {
  StreamKind kind = StreamKind::kSoftmaxLinear;
  std::size_t k = 2;
  std::size_t d = 1;
  std::size_t horizon = 0;
  // k x d (1 x d for logistic). Empty: drawn from the seed with unit rows.
  Eigen::MatrixXd truth;
  std::vector<double> q;  // fixed-marginal only
  double noise = 0.0;     // with this probability the label is uniform
  std::uint64_t seed = 0;
};

// Fills in defaults (truth matrix, q) and validates.
StreamSpec ResolveSpec(StreamSpec spec);

// Uniform on the unit ball: normalized Gaussian times U^(1/d).
std::vector<double> SampleUnitBall(std::size_t d, Rng& rng);

// P(label | x) under the stream spec.
std::vector<double> LabelDistribution(const StreamSpec& spec,
                                      std::span<const double> x);

// Draws one example; `t` only matters for the alternating stream.
Example SampleExample(const StreamSpec& spec, std::size_t t, Rng& rng);

// spec.horizon examples, reproducible from spec.seed.
std::vector<Example> Generate(const StreamSpec& spec);

// Columns x0..x{d-1},label.
void WriteStreamCsv(const std::vector<Example>& stream, std::ostream& out);
std::vector<Example> ReadStreamCsv(std::istream& in);

}  // namespace omnipred
