#include "omnipred/report.h"

#include <istream>
#include <ostream>
#include <sstream>

namespace omnipred {

using nlohmann::json;

json ReportToJson(const MetricsReport& r) {
  json j;
  j["kind"] = r.kind;
  j["T"] = r.horizon;
  j["seed"] = r.seed;
  j["eps"] = r.eps;
  j["guarantee_budget"] = r.budget;
  const bool binary = r.kind == "binary";
  j[binary ? "thresh_cal" : "linf_cal"] = r.calibration;
  j[binary ? "thresh_cal_abs" : "linf_cal_abs"] = r.calibration_abs;
  j["multiaccuracy"] = r.multiaccuracy;
  json gaps = json::object();
  for (const GapReport& g : r.gaps) {
    gaps[g.loss_id] = {
        {"gap", g.gap},
        {"predictor_loss", g.predictor_loss},
        {"benchmark_loss", g.benchmark_loss},
        {"best_comparator", g.best_comparator},
        {"recipe_multiaccuracy", g.recipe_ma},
        {"recipe_w_calibration", g.recipe_cal_w},
        {"multiaccuracy_sup", g.ma_sup},
    };
  }
  j["gaps"] = gaps;
  if (!r.gaps.empty()) j["max_gap"] = r.MaxGap();
  j["diagnostics"] = r.diagnostics;
  j["config"] = json::parse(r.config_json);
  return j;
}

json NetToJson(const SimplexNet& net) {
  json pts = json::array();
  for (std::size_t i = 0; i < net.size(); ++i) {
    auto p = net.point(i);
    pts.push_back(std::vector<double>(p.begin(), p.end()));
  }
  return {{"k", net.k()}, {"eps", net.eps()}, {"step", net.step()},
          {"points", pts}};
}

json ConfigToJson(const PipelineConfig& c) {
  json j;
  j["k"] = c.k;
  j["d"] = c.d;
  j["eps"] = c.eps;
  j["T"] = c.horizon;
  j["delta"] = c.delta;
  j["c1"] = c.c1;
  j["c2"] = c.c2;
  j["losses"] = c.losses;
  j["families"] = c.families;
  j["seed"] = c.seed;
  j["max_net_points"] = c.max_net_points;
  j["erm_iterations"] = c.erm_iterations;
  j["compute_gaps"] = c.compute_gaps;
  j["solver_tolerance"] = c.solver_tolerance;
  return j;
}

PipelineConfig ConfigFromJson(const json& j, PipelineConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "k") c.k = v.get<std::size_t>();
      else if (key == "d") c.d = v.get<std::size_t>();
      else if (key == "eps") c.eps = v.get<double>();
      else if (key == "T") c.horizon = v.get<std::size_t>();
      else if (key == "delta") c.delta = v.get<double>();
      else if (key == "c1") c.c1 = v.get<double>();
      else if (key == "c2") c.c2 = v.get<double>();
      else if (key == "losses") c.losses = v.get<std::vector<std::string>>();
      else if (key == "families") c.families = v.get<std::vector<std::string>>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "max_net_points") c.max_net_points = v.get<std::size_t>();
      else if (key == "erm_iterations") c.erm_iterations = v.get<std::size_t>();
      else if (key == "compute_gaps") c.compute_gaps = v.get<bool>();
      else if (key == "solver_tolerance") c.solver_tolerance = v.get<double>();
      else throw ConfigError("unknown config key: " + key);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

void WriteTrace(const TraceHeader& h, std::span<const Example> data,
                std::span<const std::size_t> pred_index,
                const SimplexNet& net, std::ostream& out) {
  if (data.size() != pred_index.size()) {
    throw ConfigError("trace lengths differ");
  }
  json head = {{"kind", h.kind}, {"k", h.k}, {"eps", h.eps},
               {"seed", h.seed}, {"families", h.families}};
  out << json{{"header", head}}.dump() << '\n';
  for (std::size_t t = 0; t < data.size(); ++t) {
    auto p = net.point(pred_index[t]);
    json row = {{"t", t},
                {"x", data[t].x},
                {"label", data[t].label},
                {"pred", pred_index[t]},
                {"p", std::vector<double>(p.begin(), p.end())}};
    out << row.dump() << '\n';
  }
}

Trace ReadTrace(std::istream& in) {
  Trace tr;
  std::string line;
  std::size_t lineno = 0;
  try {
    if (!std::getline(in, line)) throw ConfigError("empty trace");
    ++lineno;
    json head = json::parse(line).at("header");
    tr.header.kind = head.at("kind").get<std::string>();
    tr.header.k = head.at("k").get<std::size_t>();
    tr.header.eps = head.at("eps").get<double>();
    tr.header.seed = head.value("seed", std::uint64_t{0});
    tr.header.families =
        head.value("families", std::vector<std::string>{"identity"});
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json row = json::parse(line);
      Example e;
      e.x = row.at("x").get<std::vector<double>>();
      e.label = row.at("label").get<std::size_t>();
      tr.data.push_back(std::move(e));
      tr.pred_index.push_back(row.at("pred").get<std::size_t>());
    }
  } catch (const json::exception& e) {
    throw ConfigError("trace line " + std::to_string(lineno) + ": " +
                      e.what());
  }
  return tr;
}

std::string CsvHeader(const MetricsReport& r) {
  std::ostringstream os;
  os << "trial_id,seed,k,eps,T,"
     << (r.kind == "binary" ? "thresh_cal" : "linf_cal") << ",multiaccuracy";
  for (const GapReport& g : r.gaps) os << ",gap_" << g.loss_id;
  os << ",wallclock_ms";
  return os.str();
}

std::string CsvRow(const MetricsReport& r, std::size_t trial_id,
                   double wallclock_ms) {
  std::ostringstream os;
  os.precision(10);
  std::size_t k = 2;
  if (json cfg = json::parse(r.config_json, nullptr, false);
      cfg.is_object()) {
    k = cfg.value("k", std::size_t{2});
  }
  os << trial_id << ',' << r.seed << ',' << k << ',' << r.eps << ','
     << r.horizon << ',' << r.calibration << ',' << r.MaxMultiaccuracy();
  for (const GapReport& g : r.gaps) os << ',' << g.gap;
  os << ',' << wallclock_ms;
  return os.str();
}

}  // namespace omnipred
