#include "omnipred/datagen.h"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace omnipred {

StreamKind ParseStreamKind(const std::string& name) {
  if (name == "softmax-linear") return StreamKind::kSoftmaxLinear;
  if (name == "logistic-binary") return StreamKind::kLogisticBinary;
  if (name == "fixed-marginal") return StreamKind::kFixedMarginal;
  if (name == "adversarial-alternating") {
    return StreamKind::kAdversarialAlternating;
  }
  throw ConfigError("unknown stream kind: " + name);
}

std::string StreamKindName(StreamKind kind) {
  switch (kind) {
    case StreamKind::kSoftmaxLinear:
      return "softmax-linear";
    case StreamKind::kLogisticBinary:
      return "logistic-binary";
    case StreamKind::kFixedMarginal:
      return "fixed-marginal";
    case StreamKind::kAdversarialAlternating:
      return "adversarial-alternating";
  }
  return "?";
}

std::vector<double> SampleUnitBall(std::size_t d, Rng& rng) {
  std::vector<double> x(d);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& v : x) {
      v = rng.Normal();
      norm += v * v;
    }
  } while (norm == 0.0);
  double r = std::pow(rng.Uniform(), 1.0 / static_cast<double>(d));
  double scale = r / std::sqrt(norm);
  for (double& v : x) v *= scale;
  return x;
}

StreamSpec ResolveSpec(StreamSpec spec) {
  if (spec.k < 2) throw ConfigError("stream needs k >= 2");
  if (spec.d < 1) throw ConfigError("stream needs d >= 1");
  if (!(spec.noise >= 0.0 && spec.noise <= 1.0)) {
    throw ConfigError("noise must be in [0, 1]");
  }
  if (spec.kind == StreamKind::kLogisticBinary && spec.k != 2) {
    throw ConfigError("logistic-binary streams have k = 2");
  }
  std::size_t rows = spec.kind == StreamKind::kLogisticBinary ? 1 : spec.k;
  if (spec.truth.size() == 0) {
    Rng rng = Rng(spec.seed).Split(0x7275746855ULL);
    spec.truth.resize(rows, spec.d);
    for (std::size_t i = 0; i < rows; ++i) {
      auto dir = SampleUnitBall(spec.d, rng);
      double n = 0.0;
      for (double v : dir) n += v * v;
      n = std::sqrt(n);
      for (std::size_t j = 0; j < spec.d; ++j) spec.truth(i, j) = dir[j] / n;
    }
  }
  if (static_cast<std::size_t>(spec.truth.rows()) != rows ||
      static_cast<std::size_t>(spec.truth.cols()) != spec.d) {
    throw ConfigError("truth matrix has the wrong shape");
  }
  if (spec.kind == StreamKind::kFixedMarginal) {
    if (spec.q.empty()) spec.q.assign(spec.k, 1.0 / spec.k);
    if (spec.q.size() != spec.k) throw ConfigError("q must have k entries");
    try {
      CheckDistribution(spec.q);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("q: ") + e.what());
    }
  }
  return spec;
}

std::vector<double> LabelDistribution(const StreamSpec& spec,
                                      std::span<const double> x) {
  const std::size_t k = spec.k;
  std::vector<double> p(k, 0.0);
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
  switch (spec.kind) {
    case StreamKind::kSoftmaxLinear: {
      Eigen::VectorXd z = spec.truth * xv;
      double top = z.maxCoeff(), s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += p[i] = std::exp(z[i] - top);
      for (double& v : p) v /= s;
      break;
    }
    case StreamKind::kLogisticBinary: {
      double z = spec.truth.row(0).dot(xv);
      p[1] = 1.0 / (1.0 + std::exp(-z));
      p[0] = 1.0 - p[1];
      break;
    }
    case StreamKind::kFixedMarginal:
      p = spec.q;
      break;
    case StreamKind::kAdversarialAlternating:
      throw ConfigError("alternating stream has no label distribution");
  }
  for (double& v : p) v = (1.0 - spec.noise) * v + spec.noise / k;
  return p;
}

Example SampleExample(const StreamSpec& spec, std::size_t t, Rng& rng) {
  Example e;
  e.x = SampleUnitBall(spec.d, rng);
  if (spec.kind == StreamKind::kAdversarialAlternating) {
    e.label = t % spec.k;
    if (spec.noise > 0.0 && rng.Uniform() < spec.noise) {
      e.label = rng.UniformIndex(spec.k);
    }
  } else {
    e.label = SampleIndex(LabelDistribution(spec, e.x), rng);
  }
  return e;
}

std::vector<Example> Generate(const StreamSpec& in) {
  StreamSpec spec = ResolveSpec(in);
  Rng rng(spec.seed);
  std::vector<Example> out;
  out.reserve(spec.horizon);
  for (std::size_t t = 0; t < spec.horizon; ++t) {
    out.push_back(SampleExample(spec, t, rng));
  }
  return out;
}

void WriteStreamCsv(const std::vector<Example>& stream, std::ostream& out) {
  std::size_t d = stream.empty() ? 0 : stream[0].x.size();
  for (std::size_t j = 0; j < d; ++j) out << 'x' << j << ',';
  out << "label\n";
  out.precision(17);
  for (const Example& e : stream) {
    if (e.x.size() != d) throw ConfigError("ragged stream");
    for (double v : e.x) out << v << ',';
    out << e.label << '\n';
  }
}

std::vector<Example> ReadStreamCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV");
  std::size_t cols = 1;
  for (char c : line) cols += c == ',';
  std::size_t comma = line.rfind(',');
  std::string last = comma == std::string::npos ? line : line.substr(comma + 1);
  if (!last.empty() && last.back() == '\r') last.pop_back();
  if (last != "label") {
    throw ConfigError("CSV header must end with 'label'");
  }
  std::vector<Example> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Example e;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != cols) {
      throw ConfigError("CSV line " + std::to_string(lineno) +
                        ": wrong column count");
    }
    try {
      for (std::size_t j = 0; j + 1 < cols; ++j) e.x.push_back(std::stod(cells[j]));
      long label = std::stol(cells.back());
      if (label < 0) throw ConfigError("negative label");
      e.label = static_cast<std::size_t>(label);
    } catch (const std::logic_error&) {
      throw ConfigError("CSV line " + std::to_string(lineno) + ": bad number");
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace omnipred
