#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "omnipred/counterexamples.h"
#include "omnipred/datagen.h"
#include "omnipred/omni.h"
#include "omnipred/oracles.h"
#include "omnipred/report.h"
#include "omnipred/simplex_net.h"
#include "omnipred/verify.h"

namespace py = pybind11;
using nlohmann::json;
using namespace omnipred;

namespace {

py::object ToPython(const json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

PipelineConfig ToConfig(const py::dict& cfg) {
  std::string text =
      py::module_::import("json").attr("dumps")(cfg).cast<std::string>();
  return ConfigFromJson(json::parse(text));
}

std::vector<Example> ToExamples(const Eigen::MatrixXd& x,
                                const std::vector<std::size_t>& y) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw ConfigError("X and y have different lengths");
  }
  std::vector<Example> out(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    const auto r = static_cast<Eigen::Index>(t);
    out[t].x.resize(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out[t].x[static_cast<std::size_t>(j)] = x(r, j);
    }
    out[t].label = y[t];
  }
  return out;
}

json Resolved(const PipelineConfig& cfg, const char* command) {
  json j = ConfigToJson(cfg);
  j["command"] = command;
  return j;
}

py::dict RunResult(MetricsReport report, const PipelineConfig& cfg,
                   const char* command,
                   const std::vector<std::size_t>& pred_index,
                   const std::vector<double>& preds) {
  report.config_json = Resolved(cfg, command).dump();
  py::dict out;
  out["report"] = ToPython(ReportToJson(report));
  out["pred_index"] = pred_index;
  if (!preds.empty()) out["preds"] = preds;
  return out;
}

py::dict StatResult(const StatPredictor& pred, MetricsReport report,
                    const PipelineConfig& cfg, const char* command) {
  report.config_json = Resolved(cfg, command).dump();
  py::dict out;
  out["report"] = ToPython(ReportToJson(report));
  out["training_report"] = ToPython(ReportToJson(pred.training_report));
  out["rounds"] = pred.rounds();
  return out;
}

}  // namespace

PYBIND11_MODULE(_omnipred, m) {
  m.doc() = "Omniprediction via simultaneous approachability";

  py::register_exception<ContractError>(m, "ContractError",
                                        PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "build_net",
      [](std::size_t k, double eps, std::size_t max_points) {
        NetOptions no;
        no.max_points = max_points;
        auto net = BuildSimplexNet(k, eps, no);
        Eigen::MatrixXd pts(net.size(), k);
        for (std::size_t i = 0; i < net.size(); ++i) {
          for (std::size_t j = 0; j < k; ++j) {
            pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                net.point(i)[j];
          }
        }
        return pts;
      },
      py::arg("k"), py::arg("eps"), py::arg("max_points") = 250000,
      "Points of the eps-net of the k-simplex, one per row.");

  m.def(
      "generate",
      [](const std::string& kind, std::size_t k, std::size_t d,
         std::size_t T, std::uint64_t seed, std::vector<double> q,
         double noise) {
        StreamSpec spec;
        spec.kind = ParseStreamKind(kind);
        spec.k = k;
        spec.d = d;
        spec.horizon = T;
        spec.seed = seed;
        spec.q = std::move(q);
        spec.noise = noise;
        auto data = Generate(ResolveSpec(spec));
        Eigen::MatrixXd x(T, d);
        std::vector<std::size_t> y(T);
        for (std::size_t t = 0; t < T; ++t) {
          for (std::size_t j = 0; j < d; ++j) {
            x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) =
                data[t].x[j];
          }
          y[t] = data[t].label;
        }
        return py::make_tuple(x, y);
      },
      py::arg("kind"), py::arg("k"), py::arg("d"), py::arg("T"),
      py::arg("seed") = 0, py::arg("q") = std::vector<double>{},
      py::arg("noise") = 0.0, "Synthetic stream as (X, y).");

  m.def(
      "run_binary_online",
      [](const Eigen::MatrixXd& x, const std::vector<std::size_t>& y,
         const py::dict& config) {
        auto cfg = ToConfig(config);
        auto data = ToExamples(x, y);
        cfg.horizon = ResolveHorizon(cfg, true);
        auto run = FitOnlineBinary(data, cfg);
        return RunResult(run.report, cfg, "run-binary-online", run.pred_index,
                         run.preds);
      },
      py::arg("X"), py::arg("y"), py::arg("config") = py::dict());

  auto multiclass = [](bool uni) {
    return [uni](const Eigen::MatrixXd& x, const std::vector<std::size_t>& y,
                 const py::dict& config) {
      auto cfg = ToConfig(config);
      auto data = ToExamples(x, y);
      cfg.horizon = ResolveHorizon(cfg, false);
      auto run = uni ? FitUnion(data, cfg) : FitOnlineMulticlass(data, cfg);
      return RunResult(run.report, cfg,
                       uni ? "run-union" : "run-multiclass-online",
                       run.pred_index, {});
    };
  };
  m.def("run_multiclass_online", multiclass(false), py::arg("X"),
        py::arg("y"), py::arg("config") = py::dict());
  m.def("run_union", multiclass(true), py::arg("X"), py::arg("y"),
        py::arg("config") = py::dict());

  auto stat = [](bool binary) {
    return [binary](const Eigen::MatrixXd& x, const std::vector<std::size_t>& y,
                    const Eigen::MatrixXd& hx,
                    const std::vector<std::size_t>& hy,
                    const py::dict& config) {
      auto cfg = ToConfig(config);
      if (binary) cfg.k = 2;
      auto train = ToExamples(x, y);
      auto test = ToExamples(hx, hy);
      cfg.horizon = ResolveHorizon(cfg, binary);
      StatPredictor pred = binary ? FitStatisticalBinary(train, cfg)
                                  : FitStatisticalMulticlass(train, cfg);
      Rng rng = Rng(cfg.seed).Split(0x6576616cULL);
      auto rep = EvaluateStatistical(pred, test, cfg, rng);
      return StatResult(pred, rep, cfg,
                        binary ? "run-binary-stat" : "run-multiclass-stat");
    };
  };
  m.def("run_binary_stat", stat(true), py::arg("X"), py::arg("y"),
        py::arg("X_heldout"), py::arg("y_heldout"),
        py::arg("config") = py::dict());
  m.def("run_multiclass_stat", stat(false), py::arg("X"), py::arg("y"),
        py::arg("X_heldout"), py::arg("y_heldout"),
        py::arg("config") = py::dict());

  m.def(
      "binary_cmloo",
      [](double q, double r, std::vector<double> u, double d, double eps) {
        auto grid = BinaryGridValues(BuildSimplexNet(2, eps));
        BinaryOracleInput in{q, r, std::move(u), d};
        std::vector<std::pair<double, double>> out;
        for (const auto& [i, w] : BinaryCmloo(in, grid)) {
          out.emplace_back(grid[i], w);
        }
        return out;
      },
      py::arg("q"), py::arg("r"), py::arg("u"), py::arg("d"), py::arg("eps"),
      "Oracle mixture as (P(y = 1), weight) pairs on the eps grid.");

  m.def(
      "solve_matrix_game",
      [](const Eigen::MatrixXd& mat, double eps, std::uint64_t seed) {
        Rng rng(seed);
        auto sol = SolveMatrixGame(mat, eps, rng);
        py::dict out;
        out["column"] = sol.column;
        out["row"] = sol.row;
        out["upper"] = sol.upper;
        out["lower"] = sol.lower;
        out["value"] = sol.value();
        out["iterations"] = sol.iterations;
        return out;
      },
      py::arg("M"), py::arg("eps"), py::arg("seed") = 0,
      "min over columns, max over rows of b^T M a, to additive eps.");

  m.def(
      "verify_isotonic",
      []() {
        auto v = VerifyIsotonicCounterexample();
        py::dict out;
        out["pass"] = v.pass;
        out["squared_t"] = v.first_t;
        out["log_t"] = v.second_t;
        out["matrix_error"] = v.matrix_error;
        out["t_margin"] = v.t_margin;
        out["candidate_log"] = v.candidate_log;
        out["squared_min_log"] = v.first_min_log;
        out["candidate_beats"] = v.candidate_beats;
        return out;
      });

  m.def(
      "impossibility_demo",
      [](std::size_t T, std::uint64_t seed) {
        Rng rng(seed);
        auto r = DemoMlooImpossibility(T, rng);
        py::dict out;
        out["avg_v1"] = r.avg_v1;
        out["avg_v2"] = r.avg_v2;
        out["sum"] = r.sum;
        out["max"] = r.max;
        out["alone_v1"] = r.alone_v1;
        out["alone_v2"] = r.alone_v2;
        return out;
      },
      py::arg("T"), py::arg("seed") = 0);

  m.def(
      "oracle_suites",
      [](std::uint64_t seed) {
        py::list out;
        for (const auto& r : RunOracleSuites(seed)) {
          py::dict d;
          d["name"] = r.name;
          d["trials"] = r.trials;
          d["failures"] = r.failures;
          d["margin"] = r.margin;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 0);

  m.def("default_horizon", [](bool binary, std::size_t k, double eps,
                              double delta) {
    PipelineConfig cfg;
    cfg.k = k;
    cfg.eps = eps;
    cfg.delta = delta;
    return ResolveHorizon(cfg, binary);
  }, py::arg("binary"), py::arg("k"), py::arg("eps"), py::arg("delta") = 0.01);
}
