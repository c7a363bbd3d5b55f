#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "omnipred/counterexamples.h"
#include "omnipred/datagen.h"
#include "omnipred/omni.h"
#include "omnipred/report.h"
#include "omnipred/verify.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace omnipred;

namespace {

// Flags shared by the pipeline commands. Unset optionals leave the config
// file (or built-in default) alone.
struct PipelineFlags {
  std::string config_path;
  std::optional<std::size_t> k, d, horizon, erm_iterations, max_net_points;
  std::optional<double> eps, delta, c1, c2, solver_tolerance;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> losses, families;
  std::optional<bool> compute_gaps;
  std::size_t trials = 1;
  std::size_t workers = 0;
  std::string out_dir;
  std::string input;
  std::string stream_kind;
  double noise = 0.0;
  std::size_t heldout = 20000;
  bool trace = false;
  bool round_log = false;
};

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> ParseDoubles(const std::string& s) {
  std::vector<double> out;
  for (const std::string& item : SplitList(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not a number: " + item);
    }
  }
  return out;
}

void AddPipelineFlags(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--k", f.k, "number of classes");
  cmd->add_option("--d", f.d, "feature dimension");
  cmd->add_option("--eps", f.eps, "net radius");
  cmd->add_option("--T", f.horizon, "horizon (0: default horizon)");
  cmd->add_option("--delta", f.delta, "failure probability");
  cmd->add_option("--c1", f.c1, "horizon constant c1");
  cmd->add_option("--c2", f.c2, "horizon constant c2");
  cmd->add_option("--seed", f.seed, "base seed; trial i uses seed + i");
  cmd->add_option("--losses", f.losses, "comma-separated loss ids");
  cmd->add_option("--families", f.families,
                  "comma-separated feature maps (identity, square)");
  cmd->add_option("--erm-iterations", f.erm_iterations);
  cmd->add_option("--max-net-points", f.max_net_points);
  cmd->add_option("--solver-tolerance", f.solver_tolerance);
  cmd->add_option("--compute-gaps", f.compute_gaps,
                  "fit the ERM benchmark and report per-loss gaps");
  cmd->add_option("--trials", f.trials)->check(CLI::PositiveNumber);
  cmd->add_option("--workers", f.workers, "0: hardware concurrency");
  cmd->add_option("--out", f.out_dir, "directory for reports and CSV");
  cmd->add_option("--input", f.input, "stream CSV instead of generated data");
  cmd->add_option("--stream", f.stream_kind, "generator for synthetic data");
  cmd->add_option("--noise", f.noise, "label noise of the generator");
  cmd->add_option("--heldout", f.heldout,
                  "held-out examples for statistical evaluation");
  cmd->add_flag("--trace", f.trace, "write the prediction trace (JSONL)");
  cmd->add_flag("--round-log", f.round_log, "write the driver log (JSONL)");
}

PipelineConfig ResolveConfig(const PipelineFlags& f) {
  PipelineConfig cfg;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("cannot read config: " + f.config_path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    cfg = ConfigFromJson(j);
  }
  if (f.k) cfg.k = *f.k;
  if (f.d) cfg.d = *f.d;
  if (f.eps) cfg.eps = *f.eps;
  if (f.horizon) cfg.horizon = *f.horizon;
  if (f.delta) cfg.delta = *f.delta;
  if (f.c1) cfg.c1 = *f.c1;
  if (f.c2) cfg.c2 = *f.c2;
  if (f.seed) cfg.seed = *f.seed;
  if (f.losses) cfg.losses = SplitList(*f.losses);
  if (f.families) cfg.families = SplitList(*f.families);
  if (f.erm_iterations) cfg.erm_iterations = *f.erm_iterations;
  if (f.max_net_points) cfg.max_net_points = *f.max_net_points;
  if (f.solver_tolerance) cfg.solver_tolerance = *f.solver_tolerance;
  if (f.compute_gaps) cfg.compute_gaps = *f.compute_gaps;
  return cfg;
}

enum class Command { kBinaryOnline, kBinaryStat, kMultiOnline, kMultiStat,
                     kUnion };

bool IsBinary(Command c) {
  return c == Command::kBinaryOnline || c == Command::kBinaryStat;
}
bool IsStatistical(Command c) {
  return c == Command::kBinaryStat || c == Command::kMultiStat;
}

std::string CommandName(Command c) {
  switch (c) {
    case Command::kBinaryOnline: return "run-binary-online";
    case Command::kBinaryStat: return "run-binary-stat";
    case Command::kMultiOnline: return "run-multiclass-online";
    case Command::kMultiStat: return "run-multiclass-stat";
    case Command::kUnion: return "run-union";
  }
  return "";
}

struct TrialOutput {
  MetricsReport report;
  std::string trace;
  std::string round_log;
  double wallclock_ms = 0.0;
};

// Same stream for every trial when read from a file; otherwise generated
// from the trial seed.
struct DataSource {
  std::vector<Example> file_data;
  bool from_file = false;
  StreamSpec spec;
};

std::string Basename(Command c, std::size_t trial, std::size_t trials) {
  std::string base = CommandName(c);
  if (trials > 1) base += "_trial" + std::to_string(trial);
  return base;
}

TrialOutput RunTrial(Command cmd, PipelineConfig cfg, const DataSource& src,
                     const PipelineFlags& flags) {
  auto start = std::chrono::steady_clock::now();
  const bool binary = IsBinary(cmd);
  if (binary) cfg.k = 2;
  if (cmd == Command::kMultiOnline) cfg.families = {"identity"};
  const std::size_t T = ResolveHorizon(cfg, binary);
  const std::size_t heldout = IsStatistical(cmd) ? flags.heldout : 0;

  std::vector<Example> data;
  json stream_json;
  if (src.from_file) {
    data = src.file_data;
    stream_json = {{"input", flags.input}};
  } else {
    StreamSpec spec = src.spec;
    spec.k = cfg.k;
    spec.d = cfg.d ? cfg.d : 5;
    spec.horizon = T + heldout;
    spec.seed = cfg.seed;
    spec = ResolveSpec(spec);
    cfg.d = spec.d;
    data = Generate(spec);
    if (auto truth = TruthComparator(spec)) {
      cfg.extra_comparators.push_back(*truth);
    }
    stream_json = {{"kind", StreamKindName(spec.kind)},
                   {"noise", spec.noise},
                   {"seed", spec.seed}};
  }
  cfg.horizon = T;
  cfg.keep_log = flags.round_log;

  json resolved = ConfigToJson(cfg);
  resolved["command"] = CommandName(cmd);
  resolved["stream"] = stream_json;
  if (IsStatistical(cmd)) resolved["heldout"] = heldout;

  TrialOutput out;
  const ApproachState* state = nullptr;
  BinaryRun brun;
  MulticlassRun mrun;
  std::optional<StatPredictor> stat;
  std::span<const Example> all(data);
  switch (cmd) {
    case Command::kBinaryOnline:
      brun = FitOnlineBinary(all, cfg);
      out.report = brun.report;
      state = &brun.state;
      break;
    case Command::kMultiOnline:
    case Command::kUnion:
      mrun = cmd == Command::kUnion ? FitUnion(all, cfg)
                                    : FitOnlineMulticlass(all, cfg);
      out.report = mrun.report;
      state = &mrun.state;
      break;
    case Command::kBinaryStat:
    case Command::kMultiStat: {
      if (all.size() < T + 1) {
        throw ConfigError("statistical run needs more than T examples");
      }
      auto train = all.first(T);
      auto test = all.subspan(T);
      stat = cmd == Command::kBinaryStat ? FitStatisticalBinary(train, cfg)
                                         : FitStatisticalMulticlass(train, cfg);
      Rng rng = Rng(cfg.seed).Split(0x6576616cULL);
      out.report = EvaluateStatistical(*stat, test, cfg, rng);
      state = &stat->training_state();
      break;
    }
  }
  out.report.config_json = resolved.dump();

  if (flags.trace && !IsStatistical(cmd)) {
    std::ostringstream os;
    TraceHeader h{binary ? "binary" : "multiclass", cfg.k, cfg.eps, cfg.seed,
                  cfg.families};
    auto net = binary ? BuildSimplexNet(2, cfg.eps) : *mrun.net;
    const auto& idx = binary ? brun.pred_index : mrun.pred_index;
    WriteTrace(h, all.first(T), idx, net, os);
    out.trace = os.str();
  }
  if (flags.round_log && state) {
    std::ostringstream os;
    WriteRoundLogJsonl(*state, os);
    out.round_log = os.str();
  }
  out.wallclock_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  return out;
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

// Runs fn(i) for i in [0, n) on `workers` threads; rethrows the first error.
template <typename Fn>
void ParallelFor(std::size_t n, std::size_t workers, Fn fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

int RunPipeline(Command cmd, const PipelineFlags& flags) {
  PipelineConfig base = ResolveConfig(flags);
  DataSource src;
  if (!flags.input.empty()) {
    std::ifstream in(flags.input);
    if (!in) throw ConfigError("cannot read input: " + flags.input);
    src.file_data = ReadStreamCsv(in);
    src.from_file = true;
  } else {
    std::string kind = flags.stream_kind;
    if (kind.empty()) kind = IsBinary(cmd) ? "logistic-binary" : "softmax-linear";
    src.spec.kind = ParseStreamKind(kind);
    src.spec.noise = flags.noise;
  }
  fs::path dir = flags.out_dir.empty() ? fs::path() : fs::path(flags.out_dir);
  if (!dir.empty()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
      throw ConfigError("output directory not writable: " + dir.string());
    }
  }

  std::vector<TrialOutput> outputs(flags.trials);
  ParallelFor(flags.trials, flags.workers, [&](std::size_t i) {
    PipelineConfig cfg = base;
    cfg.seed = base.seed + i;
    outputs[i] = RunTrial(cmd, cfg, src, flags);
  });

  std::ostringstream csv;
  csv << CsvHeader(outputs[0].report) << '\n';
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    csv << CsvRow(outputs[i].report, i, outputs[i].wallclock_ms) << '\n';
  }
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    std::string report = ReportToJson(outputs[i].report).dump(2) + "\n";
    if (flags.trials == 1) std::cout << report;
    if (dir.empty()) continue;
    std::string base_name = Basename(cmd, i, flags.trials);
    WriteFile(dir / (base_name + ".json"), report);
    if (!outputs[i].trace.empty()) {
      WriteFile(dir / (base_name + ".trace.jsonl"), outputs[i].trace);
    }
    if (!outputs[i].round_log.empty()) {
      WriteFile(dir / (base_name + ".rounds.jsonl"), outputs[i].round_log);
    }
  }
  if (!dir.empty()) WriteFile(dir / (CommandName(cmd) + ".csv"), csv.str());
  if (flags.trials > 1) std::cout << csv.str();
  return 0;
}

int RunEval(const std::string& trace_path, const PipelineFlags& flags) {
  std::ifstream in(trace_path);
  if (!in) throw ConfigError("cannot read trace: " + trace_path);
  Trace tr = ReadTrace(in);
  PipelineConfig cfg = ResolveConfig(flags);
  cfg.k = tr.header.k;
  cfg.eps = tr.header.eps;
  cfg.seed = tr.header.seed;
  if (!flags.families) cfg.families = tr.header.families;
  cfg.horizon = tr.data.size();
  json resolved = ConfigToJson(cfg);
  resolved["command"] = "eval";
  resolved["trace"] = trace_path;
  MetricsReport rep;
  if (tr.header.kind == "binary") {
    auto grid = BinaryGridValues(BuildSimplexNet(2, cfg.eps));
    std::vector<double> preds;
    for (std::size_t i : tr.pred_index) {
      if (i >= grid.size()) throw ConfigError("trace index outside the net");
      preds.push_back(grid[i]);
    }
    rep = EvaluateBinary(preds, tr.data, grid, cfg);
  } else if (tr.header.kind == "multiclass") {
    NetOptions no;
    no.max_points = cfg.max_net_points;
    auto net = BuildSimplexNet(cfg.k, cfg.eps, no);
    for (std::size_t i : tr.pred_index) {
      if (i >= net.size()) throw ConfigError("trace index outside the net");
    }
    rep = EvaluateMulticlass(net, tr.pred_index, tr.data, cfg);
  } else {
    throw ConfigError("unknown trace kind: " + tr.header.kind);
  }
  rep.config_json = resolved.dump();
  std::string text = ReportToJson(rep).dump(2) + "\n";
  std::cout << text;
  if (!flags.out_dir.empty()) {
    fs::create_directories(flags.out_dir);
    WriteFile(fs::path(flags.out_dir) / "eval.json", text);
  }
  return 0;
}

struct GenFlags {
  std::string kind = "softmax-linear";
  std::optional<std::size_t> k;
  std::size_t d = 5;
  std::size_t horizon = 1000;
  std::string q;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int RunGen(const GenFlags& g) {
  StreamSpec spec;
  spec.kind = ParseStreamKind(g.kind);
  spec.d = g.d;
  spec.horizon = g.horizon;
  spec.noise = g.noise;
  spec.seed = g.seed;
  if (!g.q.empty()) spec.q = ParseDoubles(g.q);
  if (g.k) {
    spec.k = *g.k;
  } else if (!spec.q.empty()) {
    spec.k = spec.q.size();
  } else {
    spec.k = spec.kind == StreamKind::kLogisticBinary ? 2 : 3;
  }
  auto data = Generate(ResolveSpec(spec));
  if (g.out.empty()) {
    WriteStreamCsv(data, std::cout);
  } else {
    std::ofstream f(g.out);
    if (!f) throw ConfigError("cannot write " + g.out);
    WriteStreamCsv(data, f);
  }
  return 0;
}

int RunVerify(std::uint64_t seed) {
  bool all = true;
  auto line = [&](bool pass, const std::string& text) {
    all = all && pass;
    std::printf("%s  %s\n", pass ? "PASS" : "FAIL", text.c_str());
  };

  auto iso = VerifyIsotonicCounterexample();
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "isotonic counterexample: squared-loss t = %.9f (matrix error "
                "%.2e, tol 1e-6); log-loss t = %.6f (differs by %.4f, need > "
                "1e-3)",
                iso.first_t, iso.matrix_error, iso.second_t, iso.t_margin);
  line(iso.pass, buf);
  std::snprintf(buf, sizeof buf,
                "isotonic candidate log loss %.6f vs squared minimizer %.6f "
                "(margin %.6f)",
                iso.candidate_log, iso.first_min_log,
                iso.first_min_log - iso.candidate_log);
  line(iso.candidate_beats, buf);

  double worst_sum = 0.0, min_max = 1.0, worst_alone = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(seed + s);
    auto r = DemoMlooImpossibility(1000, rng);
    worst_sum = std::max(worst_sum, std::abs(r.sum - 1.0));
    min_max = std::min(min_max, r.max);
    worst_alone = std::max({worst_alone, r.alone_v1, r.alone_v2});
  }
  std::snprintf(buf, sizeof buf,
                "simultaneous approachability impossibility, 100 sequences: "
                "max |v1 + v2 - 1| = %.2e (tol 1e-12), min max(v1, v2) = %.4f "
                "(need >= 0.5), single-set payoff %.2e (need < 1e-3)",
                worst_sum, min_max, worst_alone);
  line(worst_sum <= 1e-12 && min_max >= 0.5 && worst_alone < 1e-3, buf);

  for (const SuiteResult& r : RunOracleSuites(seed)) {
    std::snprintf(buf, sizeof buf, "%s: %zu trials, %zu failures, margin %.3e",
                  r.name.c_str(), r.trials, r.failures, r.margin);
    line(r.pass(), buf);
  }
  std::printf("%s\n", all ? "ALL PASS" : "SOME CHECKS FAILED");
  return all ? 0 : 1;
}

struct RatesFlags {
  std::string pipeline = "binary-online";
  std::size_t base = 10000;
  std::size_t seeds = 20;
  double eps = 0.1;
  std::size_t k = 3;
  std::size_t d = 5;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string out;
};

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int RunRates(const RatesFlags& r) {
  const bool binary = r.pipeline == "binary-online";
  if (!binary && r.pipeline != "multiclass-online") {
    throw ConfigError("rates pipeline must be binary-online or "
                      "multiclass-online");
  }
  if (r.seeds == 0 || r.base == 0) throw ConfigError("need seeds, T >= 1");
  std::vector<double> small(r.seeds), large(r.seeds);
  ParallelFor(r.seeds, r.workers, [&](std::size_t i) {
    PipelineConfig cfg;
    cfg.k = binary ? 2 : r.k;
    cfg.eps = r.eps;
    cfg.seed = r.seed + i;
    cfg.compute_gaps = false;
    StreamSpec spec;
    spec.kind = binary ? StreamKind::kLogisticBinary : StreamKind::kSoftmaxLinear;
    spec.k = cfg.k;
    spec.d = r.d;
    spec.horizon = 2 * r.base;
    spec.seed = cfg.seed;
    auto data = Generate(ResolveSpec(spec));
    for (int half = 0; half < 2; ++half) {
      cfg.horizon = half ? 2 * r.base : r.base;
      double cal = binary ? FitOnlineBinary(data, cfg).report.calibration
                          : FitOnlineMulticlass(data, cfg).report.calibration;
      (half ? large : small)[i] = cal;
    }
  });
  std::vector<double> ratios(r.seeds);
  std::ostringstream csv;
  csv << "seed,T,calibration,T2,calibration2,ratio\n";
  for (std::size_t i = 0; i < r.seeds; ++i) {
    ratios[i] = large[i] / small[i];
    csv << r.seed + i << ',' << r.base << ',' << small[i] << ','
        << 2 * r.base << ',' << large[i] << ',' << ratios[i] << '\n';
  }
  std::cout << csv.str();
  std::printf("median_ratio,%.6f\n", Median(ratios));
  if (!r.out.empty()) WriteFile(r.out, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Omniprediction via simultaneous approachability"};
  app.require_subcommand(1);

  std::vector<std::pair<Command, CLI::App*>> runs;
  PipelineFlags pflags;
  struct RunSpec { Command cmd; const char* help; };
  for (RunSpec rs : {
           RunSpec{Command::kBinaryOnline, "online binary omnipredictor"},
           RunSpec{Command::kBinaryStat, "statistical binary omnipredictor"},
           RunSpec{Command::kMultiOnline, "online multiclass omnipredictor"},
           RunSpec{Command::kMultiStat, "statistical multiclass omnipredictor"},
           RunSpec{Command::kUnion, "multiclass over a union of families"}}) {
    auto* sub = app.add_subcommand(CommandName(rs.cmd), rs.help);
    AddPipelineFlags(sub, pflags);
    runs.emplace_back(rs.cmd, sub);
  }

  std::string trace_path;
  auto* eval = app.add_subcommand("eval", "recompute metrics from a trace");
  eval->add_option("trace", trace_path, "trace JSONL file")->required();
  eval->add_option("--config", pflags.config_path);
  eval->add_option("--losses", pflags.losses);
  eval->add_option("--families", pflags.families);
  eval->add_option("--erm-iterations", pflags.erm_iterations);
  eval->add_option("--compute-gaps", pflags.compute_gaps);
  eval->add_option("--out", pflags.out_dir);

  GenFlags gflags;
  auto* gen = app.add_subcommand("gen", "emit a synthetic stream as CSV");
  gen->add_option("--kind", gflags.kind,
                  "softmax-linear, logistic-binary, fixed-marginal, "
                  "adversarial-alternating");
  gen->add_option("--k", gflags.k);
  gen->add_option("--d", gflags.d);
  gen->add_option("--T", gflags.horizon);
  gen->add_option("--q", gflags.q, "label marginal, e.g. \"1,0,0\"");
  gen->add_option("--noise", gflags.noise);
  gen->add_option("--seed", gflags.seed);
  gen->add_option("--out", gflags.out, "output file (default stdout)");

  std::uint64_t verify_seed = 0;
  auto* verify = app.add_subcommand(
      "verify", "counterexample checks and oracle property suites");
  verify->add_option("--seed", verify_seed);

  RatesFlags rflags;
  auto* rates = app.add_subcommand("rates", "T-doubling rate study");
  rates->add_option("--pipeline", rflags.pipeline,
                    "binary-online or multiclass-online");
  rates->add_option("--T", rflags.base, "base horizon");
  rates->add_option("--seeds", rflags.seeds);
  rates->add_option("--eps", rflags.eps);
  rates->add_option("--k", rflags.k);
  rates->add_option("--d", rflags.d);
  rates->add_option("--seed", rflags.seed);
  rates->add_option("--workers", rflags.workers);
  rates->add_option("--out", rflags.out, "CSV output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (auto& [cmd, sub] : runs) {
      if (sub->parsed()) return RunPipeline(cmd, pflags);
    }
    if (eval->parsed()) return RunEval(trace_path, pflags);
    if (gen->parsed()) return RunGen(gflags);
    if (verify->parsed()) return RunVerify(verify_seed);
    if (rates->parsed()) return RunRates(rflags);
  } catch (const ContractError& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
