#include "ice/service/wire.hpp"

#include <cstdio>
#include <cstdlib>

#include "ice/error.hpp"

namespace ice::wire {

namespace {

Json reals(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(real(v));
  return out;
}

std::vector<double> reals_from(const Json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

Json optional_real(const std::optional<double>& v) {
  return v ? Json(real(*v)) : Json(nullptr);
}

std::optional<double> optional_real_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

double real(double value) {
  return std::strtod(format_real(value).c_str(), nullptr);
}

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

Json schema_to_json(const Dataset& dataset) {
  Json params = Json::array();
  for (const auto& p : dataset.parameters()) {
    params.push_back(
        {{"name", p.name}, {"levels", p.levels}, {"ordinal", p.ordinal}});
  }
  return {{"target_name", dataset.target_name()},
          {"row_count", dataset.row_count()},
          {"parameters", std::move(params)}};
}

Json to_json(const StatSummary& stats) {
  Json j;
  j["count"] = stats.count;
  j["available"] = stats.available();
  j["cuts"] = reals(stats.cuts);
  if (stats.available()) {
    j["min"] = real(stats.min);
    j["max"] = real(stats.max);
    j["mean"] = real(stats.mean);
    j["range"] = real(real(stats.max) - real(stats.min));
    j["percentiles"] = reals(stats.percentiles);
  }
  return j;
}

StatSummary stat_summary_from_json(const Json& j) {
  StatSummary s;
  s.count = j.at("count").get<std::size_t>();
  s.cuts = reals_from(j.at("cuts"));
  if (s.count > 0) {
    s.min = j.at("min").get<double>();
    s.max = j.at("max").get<double>();
    s.mean = j.at("mean").get<double>();
    s.percentiles = reals_from(j.at("percentiles"));
  }
  return s;
}

Json to_json(const DensityCurve& curve) {
  return {{"positions", reals(curve.positions)},
          {"densities", reals(curve.densities)},
          {"bandwidth", real(curve.bandwidth)},
          {"spike", curve.is_spike()}};
}

DensityCurve density_from_json(const Json& j) {
  DensityCurve c;
  c.positions = reals_from(j.at("positions"));
  c.densities = reals_from(j.at("densities"));
  c.bandwidth = j.at("bandwidth").get<double>();
  return c;
}

Json to_json(const KSResult& ks) {
  return {{"statistic", real(ks.statistic)},
          {"p_value", real(ks.p_value)},
          {"n1", ks.n1},
          {"n2", ks.n2}};
}

KSResult ks_from_json(const Json& j) {
  KSResult ks;
  ks.statistic = j.at("statistic").get<double>();
  ks.p_value = j.at("p_value").get<double>();
  ks.n1 = j.at("n1").get<std::size_t>();
  ks.n2 = j.at("n2").get<std::size_t>();
  return ks;
}

Json to_json(const SamplePlan& plan) {
  Json trials = Json::array();
  for (const auto& t : plan.trials) {
    trials.push_back(
        {{"fraction", real(t.fraction)}, {"rows", t.rows}, {"ks", to_json(t.ks)}});
  }
  return {{"fraction", real(plan.fraction)},
          {"seed", plan.seed},
          {"reason", std::string(to_string(plan.reason))},
          {"sampled_rows", plan.row_subset.count()},
          {"ks", plan.ks ? to_json(*plan.ks) : Json(nullptr)},
          {"trials", std::move(trials)}};
}

SamplePlan sample_plan_from_json(const Dataset& dataset, const Json& j) {
  SamplePlan plan;
  plan.fraction = j.at("fraction").get<double>();
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.reason = sample_reason_from_string(j.at("reason").get<std::string>());
  if (!j.at("ks").is_null()) plan.ks = ks_from_json(j.at("ks"));
  for (const auto& t : j.at("trials")) {
    plan.trials.push_back({t.at("fraction").get<double>(),
                           t.at("rows").get<std::size_t>(),
                           ks_from_json(t.at("ks"))});
  }
  plan.row_subset = plan.reason == SampleReason::threshold_met
                        ? draw_sample(dataset, plan.fraction, plan.seed)
                        : RowMask::all(dataset.row_count());
  if (plan.row_subset.count() != j.at("sampled_rows").get<std::size_t>()) {
    throw ArgumentError("sample plan does not reproduce on this dataset");
  }
  return plan;
}

Json filter_to_json(const Dataset& dataset, const FilterState& filter) {
  Json params = Json::array();
  for (std::size_t p = 0; p < filter.parameter_count(); ++p) {
    Json selected = Json::array();
    for (auto l : filter.selected_levels(p)) {
      selected.push_back(dataset.parameter(p).levels[l]);
    }
    params.push_back({{"name", dataset.parameter(p).name},
                      {"enabled", filter.enabled(p)},
                      {"selected", std::move(selected)}});
  }
  return {{"parameters", std::move(params)}};
}

FilterState filter_from_json(const Dataset& dataset, const Json& j) {
  FilterState filter = FilterState::unconstrained(dataset);
  for (const auto& entry : j.at("parameters")) {
    const std::size_t p =
        dataset.parameter_index(entry.at("name").get<std::string>());
    filter.set_enabled(p, entry.value("enabled", true));
    std::uint64_t bits = 0;
    for (const auto& level : entry.at("selected")) {
      bits |= std::uint64_t{1} << dataset.level_index(p, level.get<std::string>());
    }
    filter.set_selection_bits(p, bits);
  }
  return filter;
}

Json to_json(const RDSummary& bar) {
  return {{"parameter", bar.parameter},
          {"level", bar.level},
          {"parameter_enabled", bar.parameter_enabled},
          {"selected", bar.selected},
          {"available", bar.available()},
          {"stats", to_json(bar.stats)},
          {"density", bar.density ? to_json(*bar.density) : Json(nullptr)}};
}

RDSummary rd_summary_from_json(const Dataset& dataset, const Json& j) {
  RDSummary bar;
  bar.parameter = j.at("parameter").get<std::string>();
  bar.level = j.at("level").get<std::string>();
  bar.parameter_index = dataset.parameter_index(bar.parameter);
  bar.level_index = dataset.level_index(bar.parameter_index, bar.level);
  bar.parameter_enabled = j.at("parameter_enabled").get<bool>();
  bar.selected = j.at("selected").get<bool>();
  bar.stats = stat_summary_from_json(j.at("stats"));
  if (!j.at("density").is_null()) bar.density = density_from_json(j.at("density"));
  return bar;
}

Json explorer_to_json(const Dataset& dataset,
                      const std::vector<RDSummary>& bars) {
  Json groups = Json::array();
  for (std::size_t p = 0; p < dataset.parameter_count(); ++p) {
    Json levels = Json::array();
    bool enabled = true;
    for (const auto& bar : bars) {
      if (bar.parameter_index != p) continue;
      enabled = bar.parameter_enabled;
      levels.push_back(to_json(bar));
    }
    groups.push_back({{"name", dataset.parameter(p).name},
                      {"enabled", enabled},
                      {"levels", std::move(levels)}});
  }
  return {{"parameters", std::move(groups)}};
}

std::vector<RDSummary> explorer_from_json(const Dataset& dataset, const Json& j) {
  std::vector<RDSummary> bars;
  for (const auto& group : j.at("parameters")) {
    for (const auto& bar : group.at("levels")) {
      bars.push_back(rd_summary_from_json(dataset, bar));
    }
  }
  return bars;
}

Json to_json(const AggregateSummary& agg) {
  return {{"matched_rows", agg.matched_rows},
          {"available", agg.available()},
          {"stats", to_json(agg.stats)},
          {"density", agg.density ? to_json(*agg.density) : Json(nullptr)}};
}

AggregateSummary aggregate_from_json(const Json& j) {
  AggregateSummary agg;
  agg.matched_rows = j.at("matched_rows").get<std::size_t>();
  agg.stats = stat_summary_from_json(j.at("stats"));
  if (!j.at("density").is_null()) agg.density = density_from_json(j.at("density"));
  return agg;
}

Json entry_to_json(const Dataset& dataset, const ProvenanceEntry& entry) {
  return {{"stage", entry.stage},
          {"label", entry.label},
          {"matched_rows", entry.matched_rows},
          {"empty", entry.empty_selection()},
          {"min", optional_real(entry.min)},
          {"max", optional_real(entry.max)},
          {"replicated_from", entry.replicated_from ? Json(*entry.replicated_from)
                                                    : Json(nullptr)},
          {"filter", filter_to_json(dataset, entry.filter)}};
}

ProvenanceEntry entry_from_json(const Dataset& dataset, const Json& j) {
  ProvenanceEntry e;
  e.stage = j.at("stage").get<std::size_t>();
  e.label = j.at("label").get<std::string>();
  e.matched_rows = j.at("matched_rows").get<std::size_t>();
  e.min = optional_real_from(j, "min");
  e.max = optional_real_from(j, "max");
  if (j.contains("replicated_from") && !j.at("replicated_from").is_null()) {
    e.replicated_from = j.at("replicated_from").get<std::size_t>();
  }
  e.filter = filter_from_json(dataset, j.at("filter"));
  return e;
}

Json provenance_to_json(const Dataset& dataset, const ProvenanceLog& log) {
  Json entries = Json::array();
  for (const auto& e : log.entries()) entries.push_back(entry_to_json(dataset, e));
  return {{"stages", std::move(entries)}};
}

ProvenanceLog provenance_from_json(const Dataset& dataset, const Json& j) {
  std::vector<ProvenanceEntry> entries;
  for (const auto& e : j.at("stages")) entries.push_back(entry_from_json(dataset, e));
  return ProvenanceLog::from_entries(std::move(entries));
}

Json configuration_to_json(const Dataset& dataset,
                           const std::vector<std::size_t>& parameters,
                           const Configuration& config) {
  Json j = Json::object();
  for (std::size_t i = 0; i < parameters.size() && i < config.size(); ++i) {
    const auto& param = dataset.parameter(parameters[i]);
    j[param.name] = param.levels.at(config[i]);
  }
  return j;
}

Configuration configuration_from_json(const Dataset& dataset,
                                      const std::vector<std::size_t>& parameters,
                                      const Json& j) {
  Configuration config;
  for (auto p : parameters) {
    const auto& name = dataset.parameter(p).name;
    config.push_back(static_cast<LevelCode>(
        dataset.level_index(p, j.at(name).get<std::string>())));
  }
  return config;
}

Json trace_to_json(const Dataset& dataset, const SearchTrace& trace) {
  Json names = Json::array();
  for (auto p : trace.parameters) names.push_back(dataset.parameter(p).name);
  Json steps = Json::array();
  for (const auto& s : trace.steps) {
    steps.push_back(
        {{"step", s.step},
         {"configuration",
          configuration_to_json(dataset, trace.parameters, s.configuration)},
         {"value", optional_real(s.value)},
         {"accepted", s.accepted},
         {"current", optional_real(s.current)},
         {"best_so_far", optional_real(s.best_so_far)}});
  }
  return {{"algorithm", trace.algorithm},
          {"objective", std::string(to_string(trace.objective))},
          {"parameters", std::move(names)},
          {"evaluations", trace.evaluations},
          {"wall_seconds", real(trace.wall_seconds)},
          {"best_value", optional_real(trace.best_value)},
          {"best_configuration",
           trace.best_configuration
               ? configuration_to_json(dataset, trace.parameters,
                                       *trace.best_configuration)
               : Json(nullptr)},
          {"steps", std::move(steps)}};
}

SearchTrace trace_from_json(const Dataset& dataset, const Json& j) {
  SearchTrace t;
  t.algorithm = j.at("algorithm").get<std::string>();
  t.objective = objective_from_string(j.at("objective").get<std::string>());
  for (const auto& name : j.at("parameters")) {
    t.parameters.push_back(dataset.parameter_index(name.get<std::string>()));
  }
  t.evaluations = j.at("evaluations").get<std::size_t>();
  t.wall_seconds = j.at("wall_seconds").get<double>();
  t.best_value = optional_real_from(j, "best_value");
  if (!j.at("best_configuration").is_null()) {
    t.best_configuration =
        configuration_from_json(dataset, t.parameters, j.at("best_configuration"));
  }
  for (const auto& s : j.at("steps")) {
    TraceStep step;
    step.step = s.at("step").get<std::size_t>();
    step.configuration =
        configuration_from_json(dataset, t.parameters, s.at("configuration"));
    step.value = optional_real_from(s, "value");
    step.accepted = s.at("accepted").get<bool>();
    step.current = optional_real_from(s, "current");
    step.best_so_far = optional_real_from(s, "best_so_far");
    t.steps.push_back(std::move(step));
  }
  return t;
}

Json scores_to_json(const Dataset& dataset, const ImportanceScores& scores) {
  Json entries = Json::array();
  for (std::size_t i = 0; i < scores.parameters.size(); ++i) {
    entries.push_back({{"parameter", dataset.parameter(scores.parameters[i]).name},
                       {"score", real(scores.scores[i])}});
  }
  Json ranking = Json::array();
  for (auto p : scores.ranking) ranking.push_back(dataset.parameter(p).name);
  return {{"sample_rows", scores.sample_rows},
          {"scores", std::move(entries)},
          {"ranking", std::move(ranking)},
          {"warnings", scores.warnings}};
}

ImportanceScores scores_from_json(const Dataset& dataset, const Json& j) {
  ImportanceScores s;
  s.sample_rows = j.at("sample_rows").get<std::size_t>();
  for (const auto& e : j.at("scores")) {
    s.parameters.push_back(
        dataset.parameter_index(e.at("parameter").get<std::string>()));
    s.scores.push_back(e.at("score").get<double>());
  }
  for (const auto& name : j.at("ranking")) {
    s.ranking.push_back(dataset.parameter_index(name.get<std::string>()));
  }
  s.warnings = j.at("warnings").get<std::vector<std::string>>();
  return s;
}

Json report_to_json(const Dataset& dataset, const ImportanceReport& report) {
  Json recovery = Json::array();
  for (const auto& point : report.recovery) {
    recovery.push_back(
        {{"fraction", real(point.fraction)}, {"top_k", reals(point.top_k)}});
  }
  return {{"repeats", report.repeats},
          {"seed", report.seed},
          {"ground_truth", scores_to_json(dataset, report.ground_truth)},
          {"recovery", std::move(recovery)}};
}

ImportanceReport report_from_json(const Dataset& dataset, const Json& j) {
  ImportanceReport r;
  r.repeats = j.at("repeats").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.ground_truth = scores_from_json(dataset, j.at("ground_truth"));
  for (const auto& point : j.at("recovery")) {
    r.recovery.push_back(
        {point.at("fraction").get<double>(), reals_from(point.at("top_k"))});
  }
  return r;
}

}  // namespace ice::wire
