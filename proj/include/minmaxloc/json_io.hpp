#pragma once

// JSON forms of scenarios, estimates, distributed traces and reports.

#include "minmaxloc/central.hpp"
#include "minmaxloc/dist.hpp"
#include "minmaxloc/experiment.hpp"
#include "minmaxloc/model.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace mmloc {

using Json = nlohmann::json;

/// {"sensors": [ids], "anchors": [{"id", "x", "y"}], "true_positions":
/// {"id": [x, y]}, "edges": [{"a", "b", "z"}], "gamma", "sensing_range"}.
Json scenario_to_json(const NetworkScenario& scenario);
/// Throws InvalidInput on missing or malformed fields.
NetworkScenario scenario_from_json(const Json& j);

/// {"positions": {"id": [x, y]}, "worst_case_value", "status", "solve_seconds"}.
Json estimate_to_json(const CentralEstimate& estimate);

/// {"round", "per_node": [{"id", "x", "y", "radius_sq", "localized"}], "rmse_upper_bound"}.
Json round_to_json(const RoundRecord& round);
/// One JSON object per line.
void write_trace_jsonl(const DisMinMaxTrace& trace, std::ostream& out);

Json spec_to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const Json& j);
Json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const Json& j);

/// File helpers that raise IoError with the path.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mmloc
