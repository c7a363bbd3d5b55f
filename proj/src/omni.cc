#include "omnipred/omni.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace omnipred {

namespace {

constexpr double kNormTol = 1e-9;

std::size_t CheckData(std::span<const Example> data, std::size_t k,
                      std::size_t d) {
  if (data.empty()) throw ConfigError("no data");
  if (d == 0) d = data[0].x.size();
  if (d == 0) throw ConfigError("features must have d >= 1");
  for (std::size_t t = 0; t < data.size(); ++t) {
    const Example& e = data[t];
    if (e.x.size() != d) throw ConfigError("feature dimension mismatch");
    double n = 0.0;
    for (double v : e.x) n += v * v;
    if (std::sqrt(n) > 1.0 + kNormTol) {
      throw ConfigError("example " + std::to_string(t) +
                        " has feature norm above 1");
    }
    if (e.label >= k) {
      throw ConfigError("example " + std::to_string(t) + " has label " +
                        std::to_string(e.label) + " outside [0, k)");
    }
  }
  return d;
}

std::span<const Example> Prefix(std::span<const Example> data,
                                std::size_t horizon, const char* what) {
  if (data.size() < horizon) {
    throw ConfigError(std::string(what) + ": need " + std::to_string(horizon) +
                      " examples, have " + std::to_string(data.size()));
  }
  return data.first(horizon);
}

std::vector<FeatureMap> Families(const PipelineConfig& cfg) {
  if (cfg.families.empty()) throw ConfigError("no comparator families");
  std::vector<FeatureMap> out;
  for (const std::string& f : cfg.families) out.push_back(ParseFeatureMap(f));
  return out;
}

std::vector<PayoffSet*> Raw(
    const std::vector<std::unique_ptr<NetPayoffSet>>& sets) {
  std::vector<PayoffSet*> out;
  for (const auto& s : sets) out.push_back(s.get());
  return out;
}

std::vector<NetPayoffSet*> RawNet(
    const std::vector<std::unique_ptr<NetPayoffSet>>& sets) {
  std::vector<NetPayoffSet*> out;
  for (const auto& s : sets) out.push_back(s.get());
  return out;
}

std::vector<std::unique_ptr<NetPayoffSet>> BinarySets(
    const std::vector<double>& grid, std::size_t d, const PipelineConfig& cfg,
    const SetOptions& so) {
  std::vector<std::unique_ptr<NetPayoffSet>> sets;
  sets.push_back(std::make_unique<BinaryCalibrationSet>(grid, so));
  for (FeatureMap f : Families(cfg)) {
    sets.push_back(std::make_unique<BinaryMultiaccuracySet>(grid, d, f, so));
  }
  return sets;
}

std::vector<std::unique_ptr<NetPayoffSet>> MulticlassSets(
    const SimplexNet& net, std::size_t d, const PipelineConfig& cfg,
    const SetOptions& so) {
  std::vector<std::unique_ptr<NetPayoffSet>> sets;
  sets.push_back(std::make_unique<MulticlassCalibrationSet>(net, so));
  auto families = Families(cfg);
  for (std::size_t i = 0; i < families.size(); ++i) {
    // Repeated families get distinct ids.
    std::size_t seen = 0;
    for (std::size_t j = 0; j < i; ++j) seen += families[j] == families[i];
    std::string suffix = seen ? "_" + std::to_string(seen + 1) : "";
    sets.push_back(std::make_unique<MulticlassMultiaccuracySet>(
        net, d, families[i], so, suffix));
  }
  return sets;
}

void AddDiagnostics(const ApproachState& state,
                    const std::vector<std::unique_ptr<NetPayoffSet>>& sets,
                    double oracle_eps, MetricsReport& report) {
  double width = 0.0;
  for (const auto& s : sets) width = std::max(width, s->width());
  report.diagnostics["oracle_eps"] = oracle_eps;
  report.diagnostics["mwu_eta"] = state.mwu.eta;
  if (std::isfinite(state.max_oracle_payoff)) {
    report.diagnostics["max_oracle_payoff"] = state.max_oracle_payoff;
  }
  const double T = static_cast<double>(state.t);
  for (const auto& s : sets) {
    report.diagnostics["sup_" + s->id()] = s->SupAverage();
    report.diagnostics["regret_" + s->id()] = s->RegretBound(state.t) / T;
    report.diagnostics["bound_" + s->id()] =
        ApproachBound(state, *s, 0.0, oracle_eps, width, sets.size());
  }
}

std::shared_ptr<const SimplexNet> MakeNet(std::size_t k,
                                          const PipelineConfig& cfg) {
  NetOptions no;
  no.max_points = cfg.max_net_points;
  return std::make_shared<const SimplexNet>(BuildSimplexNet(k, cfg.eps, no));
}

}  // namespace

std::size_t ResolveHorizon(const PipelineConfig& cfg, bool binary) {
  if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) {
    throw ConfigError("eps must be in (0, 1)");
  }
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
    throw ConfigError("delta must be in (0, 1)");
  }
  if (cfg.horizon) return cfg.horizon;
  return binary ? DefaultBinaryHorizon(cfg.eps, cfg.delta, cfg.c1)
                : DefaultMulticlassHorizon(cfg.k, cfg.eps, cfg.delta, cfg.c1,
                                           cfg.c2);
}


std::size_t DefaultMulticlassHorizon(std::size_t k, double eps, double delta,
                                     double c1, double c2) {
  if (!(eps > 0.0 && delta > 0.0 && delta < 1.0)) {
    throw ConfigError("horizon default needs eps > 0 and delta in (0, 1)");
  }
  double t = c1 * double(k) * std::pow(1.0 / eps, double(k) + 1.0) +
             c2 * std::log(1.0 / delta) / (eps * eps);
  if (!(t < 1e12)) throw ConfigError("default horizon is too large");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t)));
}

std::size_t DefaultBinaryHorizon(double eps, double delta, double c1) {
  if (!(eps > 0.0 && delta > 0.0 && delta < 1.0)) {
    throw ConfigError("horizon default needs eps > 0 and delta in (0, 1)");
  }
  double t = c1 * std::log(1.0 / (delta * eps)) / (eps * eps);
  if (!(t < 1e12)) throw ConfigError("default horizon is too large");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t)));
}

double GuaranteeBudgetFactor(PipelineKind kind) {
  switch (kind) {
    case PipelineKind::kBinaryOnline:
    case PipelineKind::kBinaryStatistical:
      return 15.0;
    case PipelineKind::kMulticlassOnline:
      return 12.0;
    case PipelineKind::kMulticlassStatistical:
      return 9.0;
  }
  return 0.0;
}

std::optional<LinearComparator> TruthComparator(const StreamSpec& in) {
  if (in.kind != StreamKind::kSoftmaxLinear &&
      in.kind != StreamKind::kLogisticBinary) {
    return std::nullopt;
  }
  StreamSpec spec = ResolveSpec(in);
  LinearComparator c{spec.truth, FeatureMap::kIdentity, "truth"};
  for (Eigen::Index i = 0; i < c.c.rows(); ++i) {
    if (c.c.row(i).norm() > 1.0 + 1e-12) return std::nullopt;
  }
  // Logistic truth predicts P(y = 1) through a single row; as a multiclass
  // comparator it would need two rows, so it stays binary.
  return c;
}

MetricsReport EvaluateBinary(std::span<const double> preds,
                             std::span<const Example> data,
                             std::span<const double> grid,
                             const PipelineConfig& cfg) {
  if (preds.size() != data.size()) {
    throw ConfigError("predictions and data differ in length");
  }
  std::vector<int> labels(data.size());
  for (std::size_t t = 0; t < data.size(); ++t) {
    if (data[t].label > 1) throw ConfigError("binary label must be 0 or 1");
    labels[t] = static_cast<int>(data[t].label);
  }
  MetricsReport rep;
  rep.kind = "binary";
  rep.horizon = data.size();
  rep.seed = cfg.seed;
  rep.eps = cfg.eps;
  ThreshCal tc = ThreshCalibration(preds, labels, grid);
  rep.calibration = tc.one_sided;
  rep.calibration_abs = tc.absolute;
  auto families = Families(cfg);
  for (FeatureMap f : families) {
    rep.multiaccuracy[FeatureMapName(f)] =
        BinaryLinearMultiaccuracy(preds, labels, data, f);
  }
  std::vector<BinaryLossPtr> losses;
  if (!cfg.compute_gaps) {
  } else if (cfg.losses.empty()) {
    losses = BinaryLossBank();
  } else {
    for (const auto& id : cfg.losses) losses.push_back(MakeBinaryLoss(id));
  }
  ErmOptions erm;
  erm.iterations = cfg.erm_iterations;
  for (const auto& loss : losses) {
    std::vector<LinearComparator> bench;
    for (FeatureMap f : families) {
      bench.push_back(FitErmBinary(*loss, data, f, erm));
    }
    for (const auto& c : cfg.extra_comparators) {
      if (c.c.rows() == 1) bench.push_back(c);
    }
    rep.gaps.push_back(BinaryOmniGap(*loss, preds, labels, data, bench));
  }
  return rep;
}

MetricsReport EvaluateMulticlass(const SimplexNet& net,
                                 std::span<const std::size_t> preds,
                                 std::span<const Example> data,
                                 const PipelineConfig& cfg) {
  if (preds.size() != data.size()) {
    throw ConfigError("predictions and data differ in length");
  }
  const std::size_t k = net.k();
  std::vector<std::size_t> labels(data.size());
  Eigen::MatrixXd p(data.size(), k);
  for (std::size_t t = 0; t < data.size(); ++t) {
    labels[t] = data[t].label;
    if (preds[t] >= net.size()) throw ConfigError("prediction not on the net");
    auto s = net.point(preds[t]);
    for (std::size_t i = 0; i < k; ++i) p(t, i) = s[i];
  }
  MetricsReport rep;
  rep.kind = "multiclass";
  rep.horizon = data.size();
  rep.seed = cfg.seed;
  rep.eps = cfg.eps;
  rep.calibration = LinfCalibration(net, preds, labels);
  rep.calibration_abs = rep.calibration;
  auto families = Families(cfg);
  for (FeatureMap f : families) {
    rep.multiaccuracy[FeatureMapName(f)] =
        LinearMultiaccuracy(p, labels, data, f);
  }
  std::vector<GlmLossPtr> losses;
  if (!cfg.compute_gaps) {
  } else if (cfg.losses.empty()) {
    losses = MulticlassLossBank(k);
  } else {
    for (const auto& id : cfg.losses) losses.push_back(MakeMulticlassLoss(id, k));
  }
  ErmOptions erm;
  erm.iterations = cfg.erm_iterations;
  for (const auto& loss : losses) {
    std::vector<LinearComparator> bench;
    std::vector<FeatureMap> fitted;
    for (FeatureMap f : families) {
      if (std::find(fitted.begin(), fitted.end(), f) != fitted.end()) continue;
      fitted.push_back(f);
      bench.push_back(FitErm(*loss, data, f, erm));
    }
    for (const auto& c : cfg.extra_comparators) {
      if (static_cast<std::size_t>(c.c.rows()) == k) bench.push_back(c);
    }
    rep.gaps.push_back(OmniGap(*loss, p, labels, data, bench));
  }
  return rep;
}

BinaryRun FitOnlineBinary(std::span<const Example> stream,
                          const PipelineConfig& cfg) {
  const std::size_t T = ResolveHorizon(cfg, true);
  auto data = Prefix(stream, T, "online binary");
  const std::size_t d = CheckData(data, 2, cfg.d);
  auto net = MakeNet(2, cfg);
  BinaryRun run;
  run.grid = BinaryGridValues(*net);
  SetOptions so{T, cfg.eps, false, cfg.delta};
  auto sets = BinarySets(run.grid, d, cfg, so);
  BinaryNetOracle oracle(run.grid, RawNet(sets));
  auto raw = Raw(sets);
  ApproachOptions ao;
  ao.mode = ApproachMode::kSampled;
  ao.horizon = T;
  ao.keep_log = cfg.keep_log;
  ao.num_labels = 2;
  Rng rng(cfg.seed);
  run.state = RunApproach(raw, oracle, data, ao, rng);
  for (long idx : run.state.played) {
    run.pred_index.push_back(static_cast<std::size_t>(idx));
    run.preds.push_back(run.grid[idx]);
  }
  run.report = EvaluateBinary(run.preds, data, run.grid, cfg);
  run.report.budget =
      GuaranteeBudgetFactor(PipelineKind::kBinaryOnline) * cfg.eps;
  AddDiagnostics(run.state, sets, oracle.eps(), run.report);
  return run;
}

MulticlassRun FitOnlineMulticlass(std::span<const Example> stream,
                                  const PipelineConfig& cfg) {
  PipelineConfig linear = cfg;
  linear.families = {"identity"};
  return FitUnion(stream, linear);
}

MulticlassRun FitUnion(std::span<const Example> stream,
                       const PipelineConfig& cfg) {
  if (cfg.k < 2) throw ConfigError("k must be >= 2");
  const std::size_t T = ResolveHorizon(cfg, false);
  auto data = Prefix(stream, T, "online multiclass");
  const std::size_t d = CheckData(data, cfg.k, cfg.d);
  MulticlassRun run;
  run.net = MakeNet(cfg.k, cfg);
  SetOptions so{T, cfg.eps, false, cfg.delta};
  auto sets = MulticlassSets(*run.net, d, cfg, so);
  GameSolverOptions go;
  go.tolerance = cfg.solver_tolerance;
  MulticlassNetOracle oracle(*run.net, RawNet(sets), 1.0, go);
  auto raw = Raw(sets);
  ApproachOptions ao;
  ao.mode = ApproachMode::kSampled;
  ao.horizon = T;
  ao.keep_log = cfg.keep_log;
  ao.num_labels = cfg.k;
  Rng rng(cfg.seed);
  run.state = RunApproach(raw, oracle, data, ao, rng);
  for (long idx : run.state.played) {
    run.pred_index.push_back(static_cast<std::size_t>(idx));
  }
  run.report = EvaluateMulticlass(*run.net, run.pred_index, data, cfg);
  run.report.budget =
      GuaranteeBudgetFactor(PipelineKind::kMulticlassOnline) * cfg.eps;
  AddDiagnostics(run.state, sets, oracle.eps(), run.report);
  return run;
}

double StatPredictor::oracle_eps() const {
  return binary_ ? net_->step() : 2.0 * net_->eps();
}

MixedAction StatPredictor::MixtureAt(std::size_t t,
                                     std::span<const double> x) const {
  if (t >= snapshots_.size()) throw ConfigError("round out of range");
  const Snapshot& snap = snapshots_[t];
  const std::size_t n = binary_ ? grid_.size() : net_->size();
  Eigen::MatrixXd field = Eigen::MatrixXd::Zero(n, binary_ ? 1 : net_->k());
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    if (snap.w[i] != 0.0) {
      sets_[i]->AddAdjointAt(snap.points[i], snap.w[i], x, field);
    }
  }
  if (binary_) {
    return BinaryCmlooFromField(
        std::span<const double>(field.data(), field.size()), grid_);
  }
  Rng rng = Rng(seed_).Split(t);
  return MulticlassMlooFromField(std::move(field), *net_, 1.0, rng, solver_)
      .action;
}

std::size_t StatPredictor::PredictIndex(std::span<const double> x,
                                        Rng& rng) const {
  std::size_t t = rng.UniformIndex(snapshots_.size());
  return SampleIndex(MixtureAt(t, x), rng);
}

double StatPredictor::PredictBinary(std::span<const double> x,
                                    Rng& rng) const {
  if (!binary_) throw ConfigError("not a binary predictor");
  return grid_[PredictIndex(x, rng)];
}

std::vector<double> StatPredictor::MeanPrediction(
    std::span<const double> x) const {
  std::vector<double> mean(net_->k(), 0.0);
  for (std::size_t t = 0; t < snapshots_.size(); ++t) {
    for (const auto& [s, w] : MixtureAt(t, x)) {
      auto p = net_->point(s);
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += w * p[i];
    }
  }
  for (double& v : mean) v /= static_cast<double>(snapshots_.size());
  return mean;
}

StatPredictor FitStatisticalBinary(std::span<const Example> samples,
                                   const PipelineConfig& cfg) {
  const std::size_t T = ResolveHorizon(cfg, true);
  auto data = Prefix(samples, T, "statistical binary: samples exhausted");
  const std::size_t d = CheckData(data, 2, cfg.d);
  StatPredictor pred;
  pred.binary_ = true;
  pred.seed_ = cfg.seed;
  pred.net_ = MakeNet(2, cfg);
  pred.grid_ = BinaryGridValues(*pred.net_);
  SetOptions so{T, cfg.eps, true, cfg.delta};
  pred.sets_ = BinarySets(pred.grid_, d, cfg, so);
  BinaryNetOracle oracle(pred.grid_, RawNet(pred.sets_));
  auto raw = Raw(pred.sets_);
  ApproachOptions ao;
  ao.mode = ApproachMode::kDeterministic;
  ao.horizon = T;
  ao.keep_log = cfg.keep_log;
  ao.num_labels = 2;
  ao.before_round = [&pred](std::size_t, std::span<const double> w) {
    StatPredictor::Snapshot snap;
    snap.w.assign(w.begin(), w.end());
    for (const auto& s : pred.sets_) {
      auto p = s->LearnerPoint();
      snap.points.emplace_back(p.begin(), p.end());
    }
    pred.snapshots_.push_back(std::move(snap));
  };
  Rng rng(cfg.seed);
  pred.state_ = RunApproach(raw, oracle, data, ao, rng);
  pred.training_report.kind = "binary";
  pred.training_report.horizon = T;
  pred.training_report.seed = cfg.seed;
  pred.training_report.eps = cfg.eps;
  AddDiagnostics(pred.state_, pred.sets_, oracle.eps(), pred.training_report);
  return pred;
}

StatPredictor FitStatisticalMulticlass(std::span<const Example> samples,
                                       const PipelineConfig& cfg) {
  if (cfg.k < 2) throw ConfigError("k must be >= 2");
  const std::size_t T = ResolveHorizon(cfg, false);
  auto data = Prefix(samples, T, "statistical multiclass: samples exhausted");
  const std::size_t d = CheckData(data, cfg.k, cfg.d);
  StatPredictor pred;
  pred.binary_ = false;
  pred.seed_ = cfg.seed;
  pred.net_ = MakeNet(cfg.k, cfg);
  SetOptions so{T, cfg.eps, true, cfg.delta};
  pred.sets_ = MulticlassSets(*pred.net_, d, cfg, so);
  GameSolverOptions go;
  go.tolerance = cfg.solver_tolerance;
  pred.solver_ = go;
  MulticlassNetOracle oracle(*pred.net_, RawNet(pred.sets_), 1.0, go);
  auto raw = Raw(pred.sets_);
  ApproachOptions ao;
  ao.mode = ApproachMode::kDeterministic;
  ao.horizon = T;
  ao.keep_log = cfg.keep_log;
  ao.num_labels = cfg.k;
  ao.before_round = [&pred](std::size_t, std::span<const double> w) {
    StatPredictor::Snapshot snap;
    snap.w.assign(w.begin(), w.end());
    for (const auto& s : pred.sets_) {
      auto p = s->LearnerPoint();
      snap.points.emplace_back(p.begin(), p.end());
    }
    pred.snapshots_.push_back(std::move(snap));
  };
  Rng rng(cfg.seed);
  pred.state_ = RunApproach(raw, oracle, data, ao, rng);
  pred.training_report.kind = "multiclass";
  pred.training_report.horizon = T;
  pred.training_report.seed = cfg.seed;
  pred.training_report.eps = cfg.eps;
  AddDiagnostics(pred.state_, pred.sets_, oracle.eps(), pred.training_report);
  return pred;
}

MetricsReport EvaluateStatistical(const StatPredictor& predictor,
                                  std::span<const Example> heldout,
                                  const PipelineConfig& cfg, Rng& rng) {
  CheckData(heldout, predictor.k(), cfg.d);
  std::vector<std::size_t> idx(heldout.size());
  for (std::size_t i = 0; i < heldout.size(); ++i) {
    idx[i] = predictor.PredictIndex(heldout[i].x, rng);
  }
  MetricsReport rep;
  if (predictor.binary()) {
    std::vector<double> preds(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      preds[i] = predictor.grid()[idx[i]];
    }
    rep = EvaluateBinary(preds, heldout, predictor.grid(), cfg);
    rep.budget =
        GuaranteeBudgetFactor(PipelineKind::kBinaryStatistical) * cfg.eps;
  } else {
    rep = EvaluateMulticlass(predictor.net(), idx, heldout, cfg);
    rep.budget =
        GuaranteeBudgetFactor(PipelineKind::kMulticlassStatistical) * cfg.eps;
  }
  rep.horizon = predictor.rounds();
  rep.diagnostics = predictor.training_report.diagnostics;
  rep.diagnostics["heldout_size"] = static_cast<double>(heldout.size());
  return rep;
}

}  // namespace omnipred
