#include "omnipred/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace omnipred {

namespace {

void CheckLengths(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || b != c) throw ConfigError("metric inputs differ in length");
}

Eigen::VectorXd Features(FeatureMap map, std::span<const double> x) {
  auto phi = ApplyFeatureMap(map, x);
  return Eigen::Map<const Eigen::VectorXd>(phi.data(), phi.size());
}

std::vector<Eigen::VectorXd> AllFeatures(FeatureMap map,
                                         std::span<const Example> data) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(data.size());
  for (const Example& e : data) out.push_back(Features(map, e.x));
  return out;
}

std::vector<double> ClampBox(const Eigen::VectorXd& t) {
  std::vector<double> out(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    out[i] = std::clamp(t[i], -1.0, 1.0);
  }
  return out;
}

}  // namespace

FeatureMap ParseFeatureMap(const std::string& name) {
  if (name == "identity" || name == "linear") return FeatureMap::kIdentity;
  if (name == "square") return FeatureMap::kSquare;
  throw ConfigError("unknown feature map: " + name);
}

std::string FeatureMapName(FeatureMap map) {
  return map == FeatureMap::kIdentity ? "identity" : "square";
}

std::vector<double> ApplyFeatureMap(FeatureMap map,
                                    std::span<const double> x) {
  std::vector<double> phi(x.begin(), x.end());
  if (map == FeatureMap::kSquare) {
    for (double& v : phi) v *= v;
  }
  return phi;
}

std::vector<double> LinearComparator::Apply(std::span<const double> x) const {
  return ClampBox(c * Features(map, x));
}

void ProjectRows(Eigen::MatrixXd& c) {
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    double n = c.row(i).norm();
    if (n > 1.0) c.row(i) /= n;
  }
}

LinearComparator FitErm(const GlmLoss& loss, std::span<const Example> data,
                        FeatureMap map, const ErmOptions& options) {
  if (data.empty()) throw ConfigError("ERM needs data");
  const std::size_t k = loss.k();
  auto phi = AllFeatures(map, data);
  const Eigen::Index d = phi[0].size();
  const double n = static_cast<double>(data.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, d);
  LinearComparator best{c, map, loss.id() + "_erm_" + FeatureMapName(map)};
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it <= options.iterations; ++it) {
    double obj = 0.0;
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(k, d);
    for (std::size_t t = 0; t < data.size(); ++t) {
      auto tv = ClampBox(c * phi[t]);
      obj += loss.Value(tv, data[t].label);
      auto g = loss.GradOmega(tv);
      g[data[t].label] -= 1.0;
      grad += Eigen::Map<const Eigen::VectorXd>(g.data(), k) *
              phi[t].transpose();
    }
    obj /= n;
    if (obj < best_obj) {
      best_obj = obj;
      best.c = c;
    }
    if (it == options.iterations) break;
    // grad / n is the gradient of obj / scale; step 1/scale on obj.
    c -= grad / n;
    ProjectRows(c);
  }
  return best;
}

LinearComparator FitErmBinary(const BinaryLoss& loss,
                              std::span<const Example> data, FeatureMap map,
                              const ErmOptions& options) {
  if (data.empty()) throw ConfigError("ERM needs data");
  auto phi = AllFeatures(map, data);
  const Eigen::Index d = phi[0].size();
  const double n = static_cast<double>(data.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, d);
  LinearComparator best{c, map, loss.id() + "_erm_" + FeatureMapName(map)};
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it <= options.iterations; ++it) {
    double obj = 0.0;
    Eigen::RowVectorXd grad = Eigen::RowVectorXd::Zero(d);
    for (std::size_t t = 0; t < data.size(); ++t) {
      double tv = std::clamp(c.row(0).dot(phi[t]), -1.0, 1.0);
      int y = static_cast<int>(data[t].label);
      obj += loss.Value(tv, y);
      grad += (loss.Link(tv) - y) * phi[t].transpose();
    }
    obj /= n;
    if (obj < best_obj) {
      best_obj = obj;
      best.c = c;
    }
    if (it == options.iterations) break;
    c.row(0) -= grad / n;
    ProjectRows(c);
  }
  return best;
}

ThreshCal ThreshCalibration(std::span<const double> preds,
                            std::span<const int> labels,
                            std::span<const double> grid) {
  if (preds.size() != labels.size()) {
    throw ConfigError("metric inputs differ in length");
  }
  ThreshCal out;
  if (preds.empty() || grid.empty()) return out;
  // sum_t r_t sign(p_t - s) = 2 * (sum of r over p >= s) - total.
  std::vector<std::pair<double, double>> rows(preds.size());
  double total = 0.0;
  for (std::size_t t = 0; t < preds.size(); ++t) {
    rows[t] = {preds[t], preds[t] - labels[t]};
    total += rows[t].second;
  }
  std::sort(rows.begin(), rows.end());
  std::vector<double> suffix(rows.size() + 1, 0.0);
  for (std::size_t i = rows.size(); i-- > 0;) {
    suffix[i] = suffix[i + 1] + rows[i].second;
  }
  const double n = static_cast<double>(preds.size());
  out.one_sided = -std::numeric_limits<double>::infinity();
  for (double s : grid) {
    auto first = std::lower_bound(
        rows.begin(), rows.end(), s,
        [](const std::pair<double, double>& r, double v) { return r.first < v; });
    double v = (2.0 * suffix[first - rows.begin()] - total) / n;
    if (v > out.one_sided) {
      out.one_sided = v;
      out.argmax = s;
    }
    out.absolute = std::max(out.absolute, std::abs(v));
  }
  return out;
}

double LinfCalibration(const SimplexNet& net,
                       std::span<const std::size_t> preds,
                       std::span<const std::size_t> labels) {
  if (preds.size() != labels.size()) {
    throw ConfigError("metric inputs differ in length");
  }
  if (preds.empty()) return 0.0;
  const std::size_t k = net.k();
  std::vector<double> sums(net.size() * k, 0.0);
  for (std::size_t t = 0; t < preds.size(); ++t) {
    if (preds[t] >= net.size() || labels[t] >= k) {
      throw ConfigError("prediction or label out of range");
    }
    auto s = net.point(preds[t]);
    double* row = &sums[preds[t] * k];
    for (std::size_t i = 0; i < k; ++i) row[i] += s[i];
    row[labels[t]] -= 1.0;
  }
  double total = 0.0;
  for (double v : sums) total += std::abs(v);
  return total / static_cast<double>(preds.size());
}

double LinearMultiaccuracy(const Eigen::MatrixXd& preds,
                           std::span<const std::size_t> labels,
                           std::span<const Example> data, FeatureMap map) {
  CheckLengths(preds.rows(), labels.size(), data.size());
  if (data.empty()) return 0.0;
  const Eigen::Index k = preds.cols();
  auto phi = AllFeatures(map, data);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k, phi[0].size());
  for (std::size_t t = 0; t < data.size(); ++t) {
    Eigen::VectorXd r = preds.row(t).transpose();
    r[labels[t]] -= 1.0;
    acc += r * phi[t].transpose();
  }
  return acc.rowwise().norm().sum() / static_cast<double>(data.size());
}

double BinaryLinearMultiaccuracy(std::span<const double> preds,
                                 std::span<const int> labels,
                                 std::span<const Example> data,
                                 FeatureMap map) {
  CheckLengths(preds.size(), labels.size(), data.size());
  if (data.empty()) return 0.0;
  Eigen::VectorXd acc;
  for (std::size_t t = 0; t < data.size(); ++t) {
    Eigen::VectorXd phi = Features(map, data[t].x);
    if (t == 0) acc = Eigen::VectorXd::Zero(phi.size());
    acc += (preds[t] - labels[t]) * phi;
  }
  return acc.norm() / static_cast<double>(data.size());
}

GapReport OmniGap(const GlmLoss& loss, const Eigen::MatrixXd& preds,
                  std::span<const std::size_t> labels,
                  std::span<const Example> data,
                  std::span<const LinearComparator> benchmark) {
  CheckLengths(preds.rows(), labels.size(), data.size());
  if (benchmark.empty()) throw ConfigError("benchmark is empty");
  const std::size_t k = loss.k();
  if (static_cast<std::size_t>(preds.cols()) != k) {
    throw ConfigError("prediction width does not match the loss");
  }
  const double n = static_cast<double>(data.size());
  GapReport rep;
  rep.loss_id = loss.id();
  std::vector<double> resid(k);
  std::vector<double> comp_loss(benchmark.size(), 0.0);
  std::vector<double> comp_ma(benchmark.size(), 0.0);
  for (std::size_t t = 0; t < data.size(); ++t) {
    std::vector<double> p(k);
    for (std::size_t i = 0; i < k; ++i) p[i] = preds(t, i);
    for (std::size_t i = 0; i < k; ++i) resid[i] = p[i];
    resid[labels[t]] -= 1.0;
    auto kstar = loss.ExAnte(p);
    rep.predictor_loss += loss.Value(kstar, labels[t]);
    auto dk = loss.DiscreteDerivative(kstar);
    for (std::size_t i = 0; i < k; ++i) rep.recipe_cal_w -= dk[i] * resid[i];
    for (std::size_t j = 0; j < benchmark.size(); ++j) {
      auto tc = benchmark[j].Apply(data[t].x);
      comp_loss[j] += loss.Value(tc, labels[t]);
      auto dc = loss.DiscreteDerivative(tc);
      for (std::size_t i = 0; i < k; ++i) comp_ma[j] += dc[i] * resid[i];
    }
  }
  rep.predictor_loss /= n;
  rep.recipe_cal_w /= n;
  std::size_t best = 0;
  rep.recipe_ma = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < benchmark.size(); ++j) {
    comp_loss[j] /= n;
    comp_ma[j] /= n;
    if (comp_loss[j] < comp_loss[best]) best = j;
    rep.recipe_ma = std::max(rep.recipe_ma, comp_ma[j]);
  }
  rep.benchmark_loss = comp_loss[best];
  rep.best_comparator = benchmark[best].name;
  rep.gap = rep.predictor_loss - rep.benchmark_loss;
  for (const LinearComparator& c : benchmark) {
    rep.ma_sup = std::max(
        rep.ma_sup, loss.scale() * LinearMultiaccuracy(preds, labels, data, c.map));
  }
  return rep;
}

GapReport BinaryOmniGap(const BinaryLoss& loss, std::span<const double> preds,
                        std::span<const int> labels,
                        std::span<const Example> data,
                        std::span<const LinearComparator> benchmark) {
  CheckLengths(preds.size(), labels.size(), data.size());
  if (benchmark.empty()) throw ConfigError("benchmark is empty");
  const double n = static_cast<double>(data.size());
  GapReport rep;
  rep.loss_id = loss.id();
  std::vector<double> comp_loss(benchmark.size(), 0.0);
  std::vector<double> comp_ma(benchmark.size(), 0.0);
  for (std::size_t t = 0; t < data.size(); ++t) {
    double r = preds[t] - labels[t];
    double kstar = loss.ExAnte(preds[t]);
    rep.predictor_loss += loss.Value(kstar, labels[t]);
    rep.recipe_cal_w -= loss.DiscreteDerivative(kstar) * r;
    for (std::size_t j = 0; j < benchmark.size(); ++j) {
      double tc = benchmark[j].Apply(data[t].x)[0];
      comp_loss[j] += loss.Value(tc, labels[t]);
      comp_ma[j] += loss.DiscreteDerivative(tc) * r;
    }
  }
  rep.predictor_loss /= n;
  rep.recipe_cal_w /= n;
  std::size_t best = 0;
  rep.recipe_ma = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < benchmark.size(); ++j) {
    comp_loss[j] /= n;
    comp_ma[j] /= n;
    if (comp_loss[j] < comp_loss[best]) best = j;
    rep.recipe_ma = std::max(rep.recipe_ma, comp_ma[j]);
  }
  rep.benchmark_loss = comp_loss[best];
  rep.best_comparator = benchmark[best].name;
  rep.gap = rep.predictor_loss - rep.benchmark_loss;
  for (const LinearComparator& c : benchmark) {
    rep.ma_sup = std::max(rep.ma_sup,
                          loss.scale() * BinaryLinearMultiaccuracy(
                                             preds, labels, data, c.map));
  }
  return rep;
}

double MetricsReport::MaxGap() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const GapReport& g : gaps) m = std::max(m, g.gap);
  return m;
}

double MetricsReport::MaxMultiaccuracy() const {
  double m = 0.0;
  for (const auto& [name, v] : multiaccuracy) m = std::max(m, v);
  return m;
}

}  // namespace omnipred
