#pragma once

// JSON wire format shared by the HTTP service and the CLI. Field names are
// snake_case; every real is rounded to 12 significant digits.

#include <json.hpp>

#include "ice/dataset.hpp"
#include "ice/filter.hpp"
#include "ice/importance.hpp"
#include "ice/optimizer.hpp"
#include "ice/provenance.hpp"
#include "ice/sampling.hpp"
#include "ice/stats.hpp"

namespace ice::wire {

using Json = nlohmann::ordered_json;

/// Rounds to 12 significant decimal digits.
double real(double value);
/// Formats a real the way it appears on the wire ("%.12g").
std::string format_real(double value);

Json schema_to_json(const Dataset& dataset);

Json to_json(const StatSummary& stats);
StatSummary stat_summary_from_json(const Json& j);

Json to_json(const DensityCurve& curve);
DensityCurve density_from_json(const Json& j);

Json to_json(const KSResult& ks);
KSResult ks_from_json(const Json& j);

Json to_json(const SamplePlan& plan);
/// Rebuilds a plan; the row subset is re-drawn from (fraction, seed).
SamplePlan sample_plan_from_json(const Dataset& dataset, const Json& j);

Json filter_to_json(const Dataset& dataset, const FilterState& filter);
FilterState filter_from_json(const Dataset& dataset, const Json& j);

Json to_json(const RDSummary& bar);
RDSummary rd_summary_from_json(const Dataset& dataset, const Json& j);
/// Bars grouped by parameter: [{name, enabled, levels: [bar...]}].
Json explorer_to_json(const Dataset& dataset,
                      const std::vector<RDSummary>& bars);
std::vector<RDSummary> explorer_from_json(const Dataset& dataset, const Json& j);

Json to_json(const AggregateSummary& agg);
AggregateSummary aggregate_from_json(const Json& j);

Json entry_to_json(const Dataset& dataset, const ProvenanceEntry& entry);
ProvenanceEntry entry_from_json(const Dataset& dataset, const Json& j);
Json provenance_to_json(const Dataset& dataset, const ProvenanceLog& log);
ProvenanceLog provenance_from_json(const Dataset& dataset, const Json& j);

/// Configuration as {"parameter": "level", ...} over the given parameters.
Json configuration_to_json(const Dataset& dataset,
                           const std::vector<std::size_t>& parameters,
                           const Configuration& config);
Configuration configuration_from_json(const Dataset& dataset,
                                      const std::vector<std::size_t>& parameters,
                                      const Json& j);

Json trace_to_json(const Dataset& dataset, const SearchTrace& trace);
SearchTrace trace_from_json(const Dataset& dataset, const Json& j);

Json scores_to_json(const Dataset& dataset, const ImportanceScores& scores);
ImportanceScores scores_from_json(const Dataset& dataset, const Json& j);
Json report_to_json(const Dataset& dataset, const ImportanceReport& report);
ImportanceReport report_from_json(const Dataset& dataset, const Json& j);

}  // namespace ice::wire
