#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "omnipred/core.h"
#include "omnipred/eval.h"
#include "omnipred/omni.h"
#include "omnipred/simplex_net.h"

namespace omnipred {

nlohmann::json ReportToJson(const MetricsReport& report);
nlohmann::json NetToJson(const SimplexNet& net);
nlohmann::json ConfigToJson(const PipelineConfig& cfg);
// Applies the keys present in `j` on top of `cfg`; unknown keys throw.
PipelineConfig ConfigFromJson(const nlohmann::json& j, PipelineConfig cfg = {});

// Prediction trace: a header line, then one line per round.
struct TraceHeader {
  std::string kind;  // binary | multiclass
  std::size_t k = 2;
  double eps = 0.1;
  std::uint64_t seed = 0;
  std::vector<std::string> families;
};

void WriteTrace(const TraceHeader& header, std::span<const Example> data,
                std::span<const std::size_t> pred_index,
                const SimplexNet& net, std::ostream& out);

struct Trace {
  TraceHeader header;
  std::vector<Example> data;
  std::vector<std::size_t> pred_index;
};

Trace ReadTrace(std::istream& in);

// trial_id, seed, k, eps, T, <calibration>, multiaccuracy, gap_<id>...,
// wallclock_ms.
std::string CsvHeader(const MetricsReport& report);
std::string CsvRow(const MetricsReport& report, std::size_t trial_id,
                   double wallclock_ms);

}  // namespace omnipred
