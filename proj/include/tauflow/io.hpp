#pragma once

#include "tauflow/diagnostics.hpp"
#include "tauflow/entropy.hpp"
#include "tauflow/flow.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tauflow {

using json = nlohmann::ordered_json;

json metric_to_json(const Metric& m);
Metric metric_from_json(const json& j);

json state_to_json(const FlowState& s);
FlowState state_from_json(const json& j);

json flow_kind_to_json(const FlowKind& kind);
FlowKind flow_kind_from_json(const json& j);

/// Full trajectory: every sample, the controller state and the termination.
json trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const json& j);

json mu_result_to_json(const MuResult& r, bool include_field = true);
json conjugate_to_json(const ConjugatePair& pair, const DwDtCheck* check);
json time_series_to_json(const TimeSeries& s);
json hypothesis_to_json(const HypothesisReport& r);
json classification_to_json(const LimitClassification& c);

/// %.17g; round-trips every finite double.
std::string format_double(double v);

/// Header "t,<name>", one row per point, LF endings.
std::string series_csv(const TimeSeries& s);
/// Several series on a shared time grid: header "t,<name1>,<name2>,...".
std::string table_csv(const std::vector<const TimeSeries*>& columns);

/// 800×500 polyline chart of a series.
std::string series_svg(const TimeSeries& s);

/// Writes bytes exactly (binary mode, no newline translation).
void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& bytes);

}  // namespace tauflow
