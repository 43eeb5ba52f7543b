#include "cli.hpp"

#include <atomic>
#include <charconv>
#include <csignal>
#include <fstream>
#include <numeric>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ice/dataset.hpp"
#include "ice/filter.hpp"
#include "ice/importance.hpp"
#include "ice/optimizer.hpp"
#include "ice/provenance.hpp"
#include "ice/sampling.hpp"
#include "ice/service/http_server.hpp"
#include "ice/service/service.hpp"
#include "ice/service/wire.hpp"
#include "ice/synthetic.hpp"

namespace ice::cli {

namespace {

using wire::format_real;
using wire::Json;

enum class Format { text, csv };

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<std::string> row) {
    row.resize(header_.size());
    rows_.push_back(std::move(row));
  }

  void print(std::ostream& out, Format format) const {
    if (format == Format::csv) {
      print_csv_row(out, header_);
      for (const auto& r : rows_) print_csv_row(out, r);
      return;
    }
    std::vector<std::size_t> width(header_.size());
    for (std::size_t c = 0; c < header_.size(); ++c) {
      width[c] = header_[c].size();
      for (const auto& r : rows_) width[c] = std::max(width[c], r[c].size());
    }
    auto line = [&](const std::vector<std::string>& r) {
      std::string s;
      for (std::size_t c = 0; c < r.size(); ++c) {
        if (c > 0) s += "  ";
        s += r[c];
        if (c + 1 < r.size()) s.append(width[c] - r[c].size(), ' ');
      }
      out << s << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

 private:
  static void print_csv_row(std::ostream& out, const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c > 0) out << ',';
      const auto& cell = r[c];
      if (cell.find_first_of(",\"\n\r") == std::string::npos) {
        out << cell;
        continue;
      }
      out << '"';
      for (char ch : cell) {
        if (ch == '"') out << '"';
        out << ch;
      }
      out << '"';
    }
    out << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string fraction_text(double f) {
  auto s = format_real(f);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string optional_text(const std::optional<double>& v) {
  return v ? format_real(*v) : "-";
}

std::string configuration_text(const Dataset& ds,
                               const std::vector<std::size_t>& parameters,
                               const Configuration& config) {
  std::string s;
  for (std::size_t i = 0; i < parameters.size() && i < config.size(); ++i) {
    if (i > 0) s += ';';
    const auto& p = ds.parameter(parameters[i]);
    s += p.name + "=" + p.levels.at(config[i]);
  }
  return s;
}

std::vector<std::string> stat_header(const std::vector<double>& cuts) {
  std::vector<std::string> h = {"count", "min"};
  for (double q : cuts) h.push_back("p" + format_real(q));
  h.insert(h.end(), {"mean", "max", "range"});
  return h;
}

std::vector<std::string> stat_cells(const StatSummary& s) {
  std::vector<std::string> cells = {std::to_string(s.count)};
  if (!s.available()) {
    cells.resize(s.cuts.size() + 5, "-");
    return cells;
  }
  cells.push_back(format_real(s.min));
  for (double v : s.percentiles) cells.push_back(format_real(v));
  cells.push_back(format_real(s.mean));
  cells.push_back(format_real(s.max));
  cells.push_back(format_real(wire::real(s.max) - wire::real(s.min)));
  return cells;
}

Table level_table(const std::vector<RDSummary>& bars,
                  const std::vector<double>& cuts) {
  std::vector<std::string> header = {"parameter", "level", "enabled", "selected"};
  for (auto& h : stat_header(cuts)) header.push_back(std::move(h));
  Table t(std::move(header));
  for (const auto& bar : bars) {
    std::vector<std::string> row = {bar.parameter, bar.level,
                                    bar.parameter_enabled ? "yes" : "no",
                                    bar.selected ? "yes" : "no"};
    for (auto& c : stat_cells(bar.stats)) row.push_back(std::move(c));
    t.add(std::move(row));
  }
  return t;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::string error_code(const std::exception& e) {
  return service::error_response(e).second["error"]["code"].get<std::string>();
}

struct Common {
  std::string csv;
  std::string target;
  std::string format = "text";
  std::vector<double> cuts = kDefaultCuts;
  std::uint64_t seed = 0;

  Format fmt() const { return format == "csv" ? Format::csv : Format::text; }
  Dataset load() const { return load_csv_file(csv, target); }
};

void add_data_options(CLI::App* cmd, Common& c) {
  cmd->add_option("--csv", c.csv, "Input CSV file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--target", c.target, "Target column name")->required();
}

void add_format_option(CLI::App* cmd, Common& c) {
  cmd->add_option("--format", c.format, "Table format")
      ->check(CLI::IsMember({"text", "csv"}))
      ->capture_default_str();
}

void add_cuts_option(CLI::App* cmd, Common& c) {
  cmd->add_option("--cuts", c.cuts, "Percentile cuts in (0, 100]")
      ->delimiter(',')
      ->capture_default_str();
}

void add_seed_option(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
}

// --- commands --------------------------------------------------------------

void cmd_synth(const std::string& spec_path, std::uint64_t seed,
               const std::string& out_path, std::ostream& out) {
  std::ifstream in(spec_path);
  if (!in) throw ArgumentError("cannot open spec file '" + spec_path + "'");
  const auto spec = parse_synthetic_spec(in);
  const auto result = generate_synthetic(spec, seed);
  const Dataset& ds = result.dataset;

  std::ofstream csv(out_path, std::ios::binary);
  if (!csv) throw ArgumentError("cannot write '" + out_path + "'");
  write_csv(ds, csv);

  std::vector<std::size_t> all(ds.parameter_count());
  std::iota(all.begin(), all.end(), std::size_t{0});
  Json importance = Json::object();
  for (std::size_t p = 0; p < ds.parameter_count(); ++p) {
    importance[ds.parameter(p).name] = wire::real(result.truth.importance[p]);
  }
  Json ranking = Json::array();
  for (auto p : result.truth.importance_ranking) ranking.push_back(ds.parameter(p).name);
  const Json sidecar = {
      {"seed", seed},
      {"rows", ds.row_count()},
      {"target_name", ds.target_name()},
      {"best_configuration",
       wire::configuration_to_json(ds, all, result.truth.best_configuration)},
      {"best_value", wire::real(result.truth.best_value)},
      {"importance", importance},
      {"importance_ranking", ranking},
      {"warnings", result.warnings}};
  const std::string sidecar_path = out_path + ".truth.json";
  std::ofstream side(sidecar_path);
  if (!side) throw ArgumentError("cannot write '" + sidecar_path + "'");
  side << sidecar.dump(2) << '\n';

  for (const auto& w : result.warnings) out << "warning: " << w << '\n';
  out << "wrote " << ds.row_count() << " rows to " << out_path << '\n';
  out << "ground truth in " << sidecar_path << '\n';
  out << "best " << configuration_text(ds, all, result.truth.best_configuration)
      << " value " << format_real(result.truth.best_value) << '\n';
}

void cmd_summarize(const Common& c, std::ostream& out) {
  validate_cuts(c.cuts);
  const Dataset ds = c.load();
  const SummaryOptions options{c.cuts, kDefaultGridPoints};
  const RowMask all(ds.row_count(), true);
  const auto bars = explorer_summaries(ds, FilterState::unconstrained(ds), all, options);
  level_table(bars, c.cuts).print(out, c.fmt());
}

void cmd_filter(const Common& c, const std::string& expression, std::ostream& out) {
  validate_cuts(c.cuts);
  const Dataset ds = c.load();
  const SummaryOptions options{c.cuts, kDefaultGridPoints};
  const RowMask all(ds.row_count(), true);
  const auto filter = parse_filter_expression(ds, expression);
  const auto agg = aggregate_summary(ds, filter, all, options);

  std::vector<std::string> header = {"selection"};
  for (auto& h : stat_header(c.cuts)) header.push_back(std::move(h));
  Table aggregate(std::move(header));
  std::vector<std::string> row = {to_filter_expression(ds, filter)};
  if (row[0].empty()) row[0] = "*";
  for (auto& cell : stat_cells(agg.stats)) row.push_back(std::move(cell));
  aggregate.add(std::move(row));
  aggregate.print(out, c.fmt());
  out << '\n';
  level_table(explorer_summaries(ds, filter, all, options), c.cuts).print(out, c.fmt());
}

void cmd_sample_plan(const Common& c, const std::vector<double>& ladder,
                     double threshold, std::ostream& out) {
  const Dataset ds = c.load();
  const auto plan = choose_sample_size(ds, ladder, threshold, c.seed);
  out << "fraction " << fraction_text(plan.fraction) << " (" << to_string(plan.reason)
      << ")\n";
  out << "rows " << plan.row_subset.count() << " of " << ds.row_count() << '\n';
  if (plan.ks) {
    out << "ks_statistic " << format_real(plan.ks->statistic) << " p_value "
        << format_real(plan.ks->p_value) << '\n';
  }
  if (plan.trials.empty()) return;
  out << '\n';
  Table t({"fraction", "rows", "ks_statistic", "p_value", "passes"});
  for (const auto& trial : plan.trials) {
    t.add({fraction_text(trial.fraction), std::to_string(trial.rows),
           format_real(trial.ks.statistic), format_real(trial.ks.p_value),
           trial.ks.p_value >= threshold ? "yes" : "no"});
  }
  t.print(out, c.fmt());
}

struct OptimizeArgs {
  std::string algorithm = "annealing";
  std::string objective = "maximize_mean";
  std::size_t budget = 100;
  std::string filter;
  std::optional<double> initial_temperature;
  std::optional<double> decay;
  std::size_t every = 1;
};

void cmd_optimize(const Common& c, const OptimizeArgs& a, std::ostream& out) {
  const Dataset ds = c.load();
  const auto objective = objective_from_string(a.objective);
  const auto filter = parse_filter_expression(ds, a.filter);
  const auto space = SearchSpace::from_filter(ds, filter);
  auto schedule = default_schedule(ds);
  if (a.initial_temperature) schedule.initial_temperature = *a.initial_temperature;
  if (a.decay) schedule.decay = *a.decay;
  const auto searcher = make_searcher(a.algorithm, schedule);
  if (a.budget < 1) throw ArgumentError("budget must be at least 1");
  if (a.every < 1) throw ArgumentError("--every must be at least 1");

  DatasetEvaluator evaluator(ds, space, objective);
  const auto trace = searcher->run(evaluator, space, objective, a.budget, c.seed);

  // The exhaustive optimum, when enumerable, marks the steps that reach it.
  std::optional<double> optimum;
  if (trace.algorithm == "exhaustive") {
    optimum = trace.best_value;
  } else if (space.size() <= kDefaultExhaustiveCap) {
    DatasetEvaluator oracle(ds, space, objective);
    try {
      optimum = exhaustive_best(oracle, space, objective).value;
    } catch (const SearchError&) {
    }
  }

  Table t({"step", "configuration", "value", "accepted", "best_so_far", "optimum"});
  std::optional<double> last_best;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    const bool improved = s.best_so_far != last_best;
    last_best = s.best_so_far;
    if (!(improved || s.step % a.every == 0 || i + 1 == trace.steps.size())) continue;
    const bool at_optimum = optimum && s.best_so_far && *s.best_so_far == *optimum;
    t.add({std::to_string(s.step), configuration_text(ds, trace.parameters, s.configuration),
           optional_text(s.value), s.accepted ? "yes" : "no", optional_text(s.best_so_far),
           at_optimum ? "*" : ""});
  }
  t.print(out, c.fmt());
  out << '\n';
  out << "algorithm " << trace.algorithm << " objective " << to_string(objective)
      << " evaluations " << trace.evaluations << '\n';
  if (optimum) out << "optimum " << format_real(*optimum) << '\n';
  if (trace.best_configuration && trace.best_value) {
    out << "best " << configuration_text(ds, trace.parameters, *trace.best_configuration)
        << " value " << format_real(*trace.best_value) << '\n';
  } else {
    out << "best none\n";
  }
}

void cmd_importance(const Common& c, const std::vector<double>& fractions,
                    std::size_t repeats, std::ostream& out) {
  const Dataset ds = c.load();
  const auto report = recovery_experiment(ds, fractions, repeats, c.seed);
  const auto& truth = report.ground_truth;

  Table ranking({"rank", "parameter", "score"});
  for (std::size_t r = 0; r < truth.ranking.size(); ++r) {
    const auto p = truth.ranking[r];
    const auto pos = std::find(truth.parameters.begin(), truth.parameters.end(), p) -
                     truth.parameters.begin();
    ranking.add({std::to_string(r + 1), ds.parameter(p).name,
                 format_real(truth.scores[pos])});
  }
  ranking.print(out, c.fmt());
  out << '\n';

  std::vector<std::string> header = {"fraction", "rows"};
  const std::size_t depth = report.recovery.empty() ? 0 : report.recovery[0].top_k.size();
  for (std::size_t k = 0; k < depth; ++k) header.push_back("top" + std::to_string(k + 1));
  Table t(std::move(header));
  for (const auto& point : report.recovery) {
    std::vector<std::string> row = {fraction_text(point.fraction),
                                    std::to_string(sample_size(ds.row_count(), point.fraction))};
    for (double v : point.top_k) row.push_back(format_real(v));
    t.add(std::move(row));
  }
  t.print(out, c.fmt());
  for (const auto& w : truth.warnings) out << "warning: " << w << '\n';
}

void print_log(const Dataset& ds, const ProvenanceLog& log, Format format,
               std::ostream& out) {
  Table t({"stage", "label", "matched_rows", "min", "max", "replicated_from", "filter"});
  for (const auto& e : log.entries()) {
    t.add({std::to_string(e.stage), e.label, std::to_string(e.matched_rows),
           optional_text(e.min), optional_text(e.max),
           e.replicated_from ? std::to_string(*e.replicated_from) : "-",
           to_filter_expression(ds, e.filter)});
  }
  t.print(out, format);
}

void cmd_provenance(const Common& c, const std::vector<std::string>& steps,
                    std::ostream& out) {
  const Dataset ds = c.load();
  const RowMask all(ds.row_count(), true);
  const SummaryOptions options{c.cuts, kDefaultGridPoints};
  FilterState filter = FilterState::unconstrained(ds);
  ProvenanceLog log(filter, aggregate_summary(ds, filter, all, options).stats);
  for (const auto& step : steps) {
    if (!step.empty() && step[0] == '@') {
      std::size_t k = 0;
      const auto* end = step.data() + step.size();
      const auto [ptr, ec] = std::from_chars(step.data() + 1, end, k);
      if (ec != std::errc() || ptr != end) {
        throw ArgumentError("bad rollback step '" + step + "'");
      }
      filter = log.rollback(k).filter;
      continue;
    }
    FilterState next = apply_filter_expression(ds, filter, step);
    log.push(describe_change(ds, filter, next), next,
             aggregate_summary(ds, next, all, options).stats);
    filter = std::move(next);
  }
  print_log(ds, log, c.fmt(), out);
}

std::atomic<service::HttpServer*> g_server{nullptr};

extern "C" void handle_stop_signal(int) {
  if (auto* server = g_server.load()) server->stop();
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t workers = 2;
  std::vector<double> ladder = kDefaultLadder;
  double threshold = kDefaultPValueThreshold;
  std::string log_level = "info";
};

void cmd_serve(const Common& c, const ServeArgs& a, std::ostream& out) {
  validate_cuts(c.cuts);
  spdlog::set_level(spdlog::level::from_str(a.log_level));
  service::ServiceConfig config;
  config.workers = a.workers;
  config.cuts = c.cuts;
  config.ladder = a.ladder;
  config.threshold = a.threshold;
  config.seed = c.seed;
  service::Service svc(config);
  service::HttpServer server(svc);
  const int port = server.bind(a.host, a.port);
  if (port < 0) {
    throw ArgumentError("cannot bind " + a.host + ":" + std::to_string(a.port));
  }
  out << "listening on http://" << a.host << ":" << port << std::endl;
  g_server = &server;
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  server.listen();
  g_server = nullptr;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interactive exploration of categorical parameter spaces", "ice"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  Common common;

  std::string spec_path, out_path;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Generate a planted synthetic dataset");
  synth->add_option("--spec", spec_path, "Synthetic spec file")->required()->check(CLI::ExistingFile);
  synth->add_option("--seed", synth_seed, "Random seed")->capture_default_str();
  synth->add_option("--out", out_path, "Output CSV (ground truth goes to <out>.truth.json)")
      ->required();

  auto* summarize = app.add_subcommand("summarize", "Per-level R-D table over all rows");
  add_data_options(summarize, common);
  add_cuts_option(summarize, common);
  add_format_option(summarize, common);

  std::string expression;
  auto* filter = app.add_subcommand("filter", "Aggregate and per-level tables under a filter");
  add_data_options(filter, common);
  filter->add_option("--expr,-e", expression, "Filter expression")->required();
  add_cuts_option(filter, common);
  add_format_option(filter, common);

  std::vector<double> ladder = kDefaultLadder;
  double threshold = kDefaultPValueThreshold;
  auto* plan = app.add_subcommand("sample-plan", "Choose a sample fraction by KS test");
  add_data_options(plan, common);
  plan->add_option("--ladder", ladder, "Candidate fractions")->delimiter(',')->capture_default_str();
  plan->add_option("--threshold", threshold, "Minimum KS p-value")->capture_default_str();
  add_seed_option(plan, common);
  add_format_option(plan, common);

  OptimizeArgs opt;
  auto* optimize = app.add_subcommand("optimize", "Search for the best configuration");
  add_data_options(optimize, common);
  optimize->add_option("--algorithm", opt.algorithm)
      ->check(CLI::IsMember({"exhaustive", "random", "annealing", "sa"}))
      ->capture_default_str();
  optimize->add_option("--objective", opt.objective)
      ->check(CLI::IsMember({"maximize_mean", "maximize_max", "minimize_range"}))
      ->capture_default_str();
  optimize->add_option("--budget", opt.budget, "Evaluation budget")->capture_default_str();
  optimize->add_option("--filter", opt.filter, "Restrict the space with a filter expression");
  optimize->add_option("--initial-temperature", opt.initial_temperature);
  optimize->add_option("--decay", opt.decay);
  optimize->add_option("--every", opt.every, "Print every n-th step plus improvements")
      ->capture_default_str();
  add_seed_option(optimize, common);
  add_format_option(optimize, common);

  std::vector<double> fractions = {0.001, 0.002, 0.004, 0.01};
  std::size_t repeats = 1000;
  auto* importance = app.add_subcommand("importance", "Parameter importance recovery table");
  add_data_options(importance, common);
  importance->add_option("--fractions", fractions)->delimiter(',')->capture_default_str();
  importance->add_option("--repeats", repeats)->capture_default_str();
  add_seed_option(importance, common);
  add_format_option(importance, common);

  std::vector<std::string> steps;
  auto* provenance = app.add_subcommand(
      "provenance", "Replay filter steps ('@k' rolls back to stage k) and print the log");
  add_data_options(provenance, common);
  provenance->add_option("--step", steps, "Filter expression or @k, repeatable")->required();
  add_format_option(provenance, common);

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", serve_args.host)->envname("ICE_HOST")->capture_default_str();
  serve->add_option("--port", serve_args.port)->envname("ICE_PORT")->capture_default_str();
  serve->add_option("--workers", serve_args.workers)
      ->envname("ICE_WORKERS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  serve->add_option("--ladder", serve_args.ladder)
      ->envname("ICE_LADDER")
      ->delimiter(',')
      ->capture_default_str();
  serve->add_option("--threshold", serve_args.threshold)
      ->envname("ICE_THRESHOLD")
      ->capture_default_str();
  serve->add_option("--cuts", common.cuts)
      ->envname("ICE_CUTS")
      ->delimiter(',')
      ->capture_default_str();
  serve->add_option("--seed", common.seed)->envname("ICE_SEED")->capture_default_str();
  serve->add_option("--log-level", serve_args.log_level)
      ->envname("ICE_LOG_LEVEL")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
      ->capture_default_str();

  std::vector<std::string> argv_rest(args.rbegin(), args.rend());
  if (!argv_rest.empty()) argv_rest.pop_back();  // program name
  try {
    app.parse(argv_rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (*synth) cmd_synth(spec_path, synth_seed, out_path, out);
    if (*summarize) cmd_summarize(common, out);
    if (*filter) cmd_filter(common, expression, out);
    if (*plan) cmd_sample_plan(common, ladder, threshold, out);
    if (*optimize) cmd_optimize(common, opt, out);
    if (*importance) cmd_importance(common, fractions, repeats, out);
    if (*provenance) cmd_provenance(common, steps, out);
    if (*serve) cmd_serve(common, serve_args, out);
  } catch (const std::exception& e) {
    err << "error[" << error_code(e) << "]: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}

}  // namespace ice::cli
