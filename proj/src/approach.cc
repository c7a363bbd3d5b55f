#include "omnipred/approach.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace omnipred {

namespace {

[[noreturn]] void RethrowWithRound(std::size_t t, const std::exception& e) {
  std::ostringstream msg;
  msg << "round " << t << ": " << e.what();
  throw ContractError(msg.str());
}

}  // namespace

BinaryNetOracle::BinaryNetOracle(std::vector<double> grid,
                                 std::vector<NetPayoffSet*> sets)
    : grid_(std::move(grid)), sets_(std::move(sets)) {
  if (grid_.size() < 2) throw ConfigError("binary grid needs >= 2 points");
  if (sets_.empty()) throw ConfigError("oracle needs at least one set");
}

double BinaryNetOracle::eps() const {
  double gap = 0.0;
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    gap = std::max(gap, grid_[i] - grid_[i - 1]);
  }
  return gap;
}

MixedAction BinaryNetOracle::Respond(std::span<const double> w,
                                     std::span<const double> x, Rng&) {
  if (w.size() != sets_.size()) {
    throw ContractError("oracle weight count does not match its sets");
  }
  Eigen::MatrixXd field = Eigen::MatrixXd::Zero(grid_.size(), 1);
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    if (w[i] != 0.0) sets_[i]->AddAdjoint(w[i], x, field);
  }
  field_.assign(field.data(), field.data() + field.size());
  return BinaryCmlooFromField(field_, grid_);
}

MulticlassNetOracle::MulticlassNetOracle(const SimplexNet& net,
                                         std::vector<NetPayoffSet*> sets,
                                         double r, GameSolverOptions options)
    : net_(net), sets_(std::move(sets)), r_(r), options_(options) {
  if (sets_.empty()) throw ConfigError("oracle needs at least one set");
  if (!(r_ > 0.0)) throw ConfigError("oracle scale R must be positive");
}

MixedAction MulticlassNetOracle::Respond(std::span<const double> w,
                                         std::span<const double> x,
                                         Rng& rng) {
  if (w.size() != sets_.size()) {
    throw ContractError("oracle weight count does not match its sets");
  }
  Eigen::MatrixXd field = Eigen::MatrixXd::Zero(net_.size(), net_.k());
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    if (w[i] != 0.0) sets_[i]->AddAdjoint(w[i], x, field);
  }
  MlooResult res = MulticlassMlooFromField(std::move(field), net_, r_, rng,
                                           options_);
  last_gap_ = res.solver_gap;
  return std::move(res.action);
}

ApproachState RunApproach(std::span<PayoffSet* const> sets, Oracle& oracle,
                          std::span<const Example> stream,
                          const ApproachOptions& options, Rng& rng) {
  if (sets.empty()) throw ConfigError("need at least one payoff set");
  std::size_t horizon = options.horizon ? options.horizon : stream.size();
  if (horizon == 0) throw ConfigError("horizon must be >= 1");
  if (stream.size() < horizon) {
    throw ConfigError("stream exhausted: have " +
                      std::to_string(stream.size()) + " examples, need " +
                      std::to_string(horizon));
  }
  const std::size_t m = sets.size();
  double width = 0.0;
  ApproachState state;
  for (PayoffSet* s : sets) {
    width = std::max(width, s->width());
    state.set_ids.push_back(s->id());
  }
  const bool sampled = options.mode == ApproachMode::kSampled;
  double eta = options.eta >= 0.0 ? options.eta
                                  : MwuStepSize(m, width, horizon, sampled);
  state.mwu = MakeMwu(m, eta, width);
  state.gain_sums.assign(m, 0.0);
  state.mean_gain_sums.assign(m, 0.0);
  state.played.reserve(horizon);
  state.actions.reserve(horizon);

  std::vector<double> gains(m), mean_gains(m);
  for (std::size_t t = 0; t < horizon; ++t) {
    const Example& ex = stream[t];
    std::vector<double> w = state.mwu.weights;
    if (options.before_round) options.before_round(t, w);
    MixedAction action;
    try {
      action = oracle.Respond(w, ex.x, rng);
    } catch (const ContractError& e) {
      RethrowWithRound(t, e);
    }
    long played_index = -1;
    MixedAction played_action;
    if (sampled) {
      played_index = static_cast<long>(SampleIndex(action, rng));
      played_action = PointMass(static_cast<std::size_t>(played_index));
    }
    const MixedAction& played = sampled ? played_action : action;

    // Pairings use the learners' round-t iterates, so they come first.
    for (std::size_t i = 0; i < m; ++i) {
      gains[i] = sets[i]->Pairing(played, ex.label, ex.x);
      mean_gains[i] =
          sampled ? sets[i]->Pairing(action, ex.label, ex.x) : gains[i];
    }
    double oracle_payoff = 0.0;
    if (options.num_labels > 0) {
      oracle_payoff = -std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < options.num_labels; ++b) {
        double v = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          v += w[i] * sets[i]->Pairing(action, b, ex.x);
        }
        oracle_payoff = std::max(oracle_payoff, v);
      }
      state.max_oracle_payoff = std::max(state.max_oracle_payoff,
                                         oracle_payoff);
    }
    try {
      for (std::size_t i = 0; i < m; ++i) {
        sets[i]->Observe(played, ex.label, ex.x);
      }
      state.mwu = MwuUpdate(state.mwu, gains);
    } catch (const ContractError& e) {
      RethrowWithRound(t, e);
    }
    for (std::size_t i = 0; i < m; ++i) {
      state.gain_sums[i] += gains[i];
      state.mean_gain_sums[i] += mean_gains[i];
    }
    state.played.push_back(played_index);
    if (options.keep_log) {
      RoundRecord rec;
      rec.t = t;
      rec.w = std::move(w);
      rec.gains = gains;
      rec.mean_gains = mean_gains;
      rec.action = action;
      rec.played = played_index;
      rec.label = ex.label;
      rec.oracle_payoff = oracle_payoff;
      state.log.push_back(std::move(rec));
    }
    state.actions.push_back(std::move(action));
    state.t = t + 1;
  }
  return state;
}

AveragePayoff AveragePayoffOf(const ApproachState& state,
                              std::span<PayoffSet* const> sets,
                              const std::string& id) {
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i]->id() != id) continue;
    AveragePayoff out;
    out.sup = sets[i]->SupAverage();
    if (state.t > 0 && i < state.gain_sums.size()) {
      out.learner_average = state.gain_sums[i] / static_cast<double>(state.t);
    }
    return out;
  }
  throw ConfigError("unknown payoff set id: " + id);
}

double ApproachBound(const ApproachState& state, const PayoffSet& set,
                     double rho, double oracle_eps, double width,
                     std::size_t num_sets) {
  if (state.t == 0) throw ConfigError("run has no rounds");
  double t = static_cast<double>(state.t);
  double mwu = width * std::sqrt(2.0 * t * std::log(double(num_sets)));
  return rho + oracle_eps + (set.RegretBound(state.t) + mwu) / t;
}

void WriteRoundLogJsonl(const ApproachState& state, std::ostream& out) {
  for (const RoundRecord& r : state.log) {
    nlohmann::json j;
    j["t"] = r.t;
    j["w"] = r.w;
    j["gains"] = r.gains;
    j["mean_gains"] = r.mean_gains;
    nlohmann::json act = nlohmann::json::array();
    for (const WeightedIndex& wi : r.action) {
      act.push_back({wi.index, wi.weight});
    }
    j["action"] = std::move(act);
    j["played"] = r.played;
    j["label"] = r.label;
    j["oracle_payoff"] = r.oracle_payoff;
    out << j.dump() << '\n';
  }
}

}  // namespace omnipred
