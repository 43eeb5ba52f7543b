#include "ice/service/service.hpp"

#include <sstream>

#include <spdlog/spdlog.h>

#include "ice/filter.hpp"
#include "ice/importance.hpp"
#include "ice/optimizer.hpp"
#include "ice/provenance.hpp"
#include "ice/sampling.hpp"

namespace ice::service {

namespace {

Json error_body(const std::string& code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

enum class JobStatus { queued, running, finished, failed };

std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::queued:
      return "queued";
    case JobStatus::running:
      return "running";
    case JobStatus::finished:
      return "finished";
    case JobStatus::failed:
      return "failed";
  }
  return "unknown";
}

}  // namespace

std::pair<int, Json> error_response(const std::exception& e) {
  if (const auto* api = dynamic_cast<const ApiError*>(&e)) {
    return {api->status(),
            error_body(api->status() == 404 ? "not_found" : "bad_request",
                       api->what())};
  }
  if (const auto* data = dynamic_cast<const DataError*>(&e)) {
    Json body = error_body("invalid_data", data->what());
    if (data->row()) body["error"]["row"] = *data->row();
    if (data->column()) body["error"]["column"] = *data->column();
    return {400, body};
  }
  if (dynamic_cast<const SchemaError*>(&e)) {
    return {400, error_body("unknown_name", e.what())};
  }
  if (dynamic_cast<const ArgumentError*>(&e)) {
    return {400, error_body("invalid_argument", e.what())};
  }
  if (dynamic_cast<const SearchError*>(&e)) {
    return {422, error_body("search_failed", e.what())};
  }
  if (dynamic_cast<const Json::exception*>(&e)) {
    return {400, error_body("malformed_json", e.what())};
  }
  return {500, error_body("internal", e.what())};
}

WorkerPool::WorkerPool(std::size_t workers) {
  if (workers == 0) workers = 1;
  for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this] { run(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  ready_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::submit(std::function<void()> task) {
  {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(task));
  }
  ready_.notify_one();
}

void WorkerPool::run() {
  while (true) {
    std::function<void()> task;
    {
      std::unique_lock lock(mutex_);
      ready_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    task();
  }
}

struct Service::DatasetEntry {
  std::string id;
  Dataset dataset;
};

struct Service::Session {
  std::string id;
  std::shared_ptr<const DatasetEntry> data;
  SamplePlan plan;
  SummaryOptions options;
  FilterState filter;
  ProvenanceLog log;
  mutable std::mutex mutex;

  const Dataset& dataset() const { return data->dataset; }
};

struct Service::Job {
  std::string id;
  std::string session_id;
  std::string algorithm;
  ObjectiveKind objective = ObjectiveKind::maximize_mean;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  std::shared_ptr<const DatasetEntry> data;

  mutable std::mutex mutex;
  mutable std::condition_variable done;
  JobStatus status = JobStatus::queued;
  std::size_t evaluations = 0;
  std::optional<double> best_so_far;
  std::optional<SearchTrace> trace;
  std::string error;
};

namespace {

// Forwards to the dataset evaluator and publishes progress for polling.
class ProgressEvaluator final : public Evaluator {
 public:
  ProgressEvaluator(Evaluator& inner, ObjectiveKind objective,
                    std::function<void(std::optional<double>)> report)
      : inner_(inner), objective_(objective), report_(std::move(report)) {}

  std::optional<double> evaluate(const Configuration& config) override {
    auto value = inner_.evaluate(config);
    if (value && (!best_ || better(objective_, *value, *best_))) best_ = value;
    report_(best_);
    return value;
  }

 private:
  Evaluator& inner_;
  ObjectiveKind objective_;
  std::function<void(std::optional<double>)> report_;
  std::optional<double> best_;
};

}  // namespace

Service::Service(ServiceConfig config)
    : config_(std::move(config)), pool_(config_.workers) {
  validate_cuts(config_.cuts);
}

Service::~Service() = default;

std::string Service::next_id(std::string_view prefix) {
  return std::string(prefix) + "-" + std::to_string(++counter_);
}

std::shared_ptr<const Service::DatasetEntry> Service::find_dataset(
    const std::string& id) const {
  std::shared_lock lock(registry_mutex_);
  const auto it = datasets_.find(id);
  if (it == datasets_.end()) throw ApiError(404, "unknown dataset '" + id + "'");
  return it->second;
}

std::shared_ptr<Service::Session> Service::find_session(
    const std::string& id) const {
  std::shared_lock lock(registry_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ApiError(404, "unknown session '" + id + "'");
  return it->second;
}

std::shared_ptr<Service::Job> Service::find_job(const std::string& id) const {
  std::shared_lock lock(registry_mutex_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) throw ApiError(404, "unknown job '" + id + "'");
  return it->second;
}

Json Service::create_dataset(std::string_view csv,
                             const std::string& target_column) {
  if (target_column.empty()) {
    throw ApiError(400, "target column name is required");
  }
  std::istringstream in{std::string(csv)};
  auto entry = std::make_shared<DatasetEntry>();
  entry->dataset = load_csv(in, target_column);
  {
    std::unique_lock lock(registry_mutex_);
    entry->id = next_id("ds");
    datasets_.emplace(entry->id, entry);
  }
  spdlog::info("loaded dataset {} ({} rows, {} parameters)", entry->id,
               entry->dataset.row_count(), entry->dataset.parameter_count());
  Json out = {{"dataset_id", entry->id}};
  out.update(wire::schema_to_json(entry->dataset));
  return out;
}

Json Service::get_dataset(const std::string& dataset_id) const {
  const auto entry = find_dataset(dataset_id);
  Json out = {{"dataset_id", entry->id}};
  out.update(wire::schema_to_json(entry->dataset));
  return out;
}

Json Service::list_datasets() const {
  std::shared_lock lock(registry_mutex_);
  Json out = Json::array();
  for (const auto& [id, entry] : datasets_) {
    out.push_back({{"dataset_id", id},
                   {"row_count", entry->dataset.row_count()},
                   {"target_name", entry->dataset.target_name()}});
  }
  return {{"datasets", std::move(out)}};
}

Json Service::session_snapshot(const Session& session) const {
  const Dataset& ds = session.dataset();
  return {{"session_id", session.id},
          {"dataset_id", session.data->id},
          {"schema", wire::schema_to_json(ds)},
          {"cuts", session.options.cuts},
          {"grid_points", session.options.grid_points},
          {"sample_plan", wire::to_json(session.plan)},
          {"filter", wire::filter_to_json(ds, session.filter)},
          {"provenance", wire::provenance_to_json(ds, session.log)}};
}

Json Service::view_payload(const Session& session) const {
  const Dataset& ds = session.dataset();
  return {{"filter", wire::filter_to_json(ds, session.filter)},
          {"aggregate", wire::to_json(aggregate_summary(
                            ds, session.filter, session.plan.row_subset,
                            session.options))},
          {"explorer", wire::explorer_to_json(
                           ds, explorer_summaries(ds, session.filter,
                                                  session.plan.row_subset,
                                                  session.options))}};
}

Json Service::create_session(const Json& request) {
  const auto data = find_dataset(request.at("dataset_id").get<std::string>());
  auto session = std::make_shared<Session>();
  session->data = data;
  session->options.cuts = field_or(request, "cuts", config_.cuts);
  session->options.grid_points =
      field_or(request, "grid_points", config_.grid_points);
  validate_cuts(session->options.cuts);
  if (session->options.grid_points < 2) {
    throw ArgumentError("grid_points must be at least 2");
  }
  session->plan = choose_sample_size(
      data->dataset, field_or(request, "ladder", config_.ladder),
      field_or(request, "threshold", config_.threshold),
      field_or(request, "seed", config_.seed));
  session->filter = FilterState::unconstrained(data->dataset);
  const auto initial = aggregate_summary(data->dataset, session->filter,
                                         session->plan.row_subset,
                                         session->options);
  session->log = ProvenanceLog(session->filter, initial.stats);
  {
    std::unique_lock lock(registry_mutex_);
    session->id = next_id("s");
    sessions_.emplace(session->id, session);
  }
  spdlog::info("session {} on {}: sample fraction {} ({})", session->id,
               data->id, session->plan.fraction, to_string(session->plan.reason));
  return session_snapshot(*session);
}

Json Service::get_session(const std::string& session_id) const {
  const auto session = find_session(session_id);
  std::lock_guard lock(session->mutex);
  return session_snapshot(*session);
}

Json Service::get_explorer(const std::string& session_id) const {
  const auto session = find_session(session_id);
  std::lock_guard lock(session->mutex);
  const Dataset& ds = session->dataset();
  return wire::explorer_to_json(
      ds, explorer_summaries(ds, session->filter, session->plan.row_subset,
                             session->options));
}

Json Service::get_aggregate(const std::string& session_id) const {
  const auto session = find_session(session_id);
  std::lock_guard lock(session->mutex);
  return wire::to_json(aggregate_summary(session->dataset(), session->filter,
                                         session->plan.row_subset,
                                         session->options));
}

Json Service::get_provenance(const std::string& session_id) const {
  const auto session = find_session(session_id);
  std::lock_guard lock(session->mutex);
  return wire::provenance_to_json(session->dataset(), session->log);
}

Json Service::apply_filter(const std::string& session_id, const Json& delta) {
  const auto session = find_session(session_id);
  std::lock_guard lock(session->mutex);
  const Dataset& ds = session->dataset();

  FilterState next = session->filter;
  if (delta.contains("expression")) {
    next = apply_filter_expression(ds, next,
                                   delta.at("expression").get<std::string>());
  }
  for (const auto& item : delta.value("select_only", Json::array())) {
    const auto p = ds.parameter_index(item.at("parameter").get<std::string>());
    next.set_enabled(p, true);
    next.select_only(p, ds.level_index(p, item.at("level").get<std::string>()));
  }
  for (const auto& name : delta.value("toggle_parameters", Json::array())) {
    const auto p = ds.parameter_index(name.get<std::string>());
    next.set_enabled(p, !next.enabled(p));
  }
  for (const auto& item : delta.value("toggle_levels", Json::array())) {
    const auto p = ds.parameter_index(item.at("parameter").get<std::string>());
    next.toggle_level(p, ds.level_index(p, item.at("level").get<std::string>()));
  }

  const std::string label = delta.contains("label")
                                ? delta.at("label").get<std::string>()
                                : describe_change(ds, session->filter, next);
  const auto agg =
      aggregate_summary(ds, next, session->plan.row_subset, session->options);
  const auto& entry = session->log.push(label, next, agg.stats);
  session->filter = std::move(next);

  Json out = {{"stage", wire::entry_to_json(ds, entry)}};
  out.update(view_payload(*session));
  return out;
}

Json Service::rollback(const std::string& session_id, std::size_t stage) {
  const auto session = find_session(session_id);
  std::lock_guard lock(session->mutex);
  const Dataset& ds = session->dataset();
  const auto& entry = session->log.rollback(stage);
  session->filter = entry.filter;
  Json out = {{"stage", wire::entry_to_json(ds, entry)},
              {"provenance", wire::provenance_to_json(ds, session->log)}};
  out.update(view_payload(*session));
  return out;
}

Json Service::start_search(const std::string& session_id, const Json& request) {
  const auto session = find_session(session_id);
  auto job = std::make_shared<Job>();
  FilterState filter;
  {
    std::lock_guard lock(session->mutex);
    filter = session->filter;
    job->data = session->data;
  }
  job->session_id = session_id;
  job->algorithm = field_or<std::string>(request, "algorithm", "annealing");
  job->objective = objective_from_string(
      field_or<std::string>(request, "objective", "maximize_mean"));
  job->budget = field_or<std::size_t>(request, "budget", 100);
  job->seed = field_or<std::uint64_t>(request, "seed", config_.seed);
  AnnealingSchedule schedule = default_schedule(job->data->dataset);
  schedule.initial_temperature = field_or(request, "initial_temperature",
                                          schedule.initial_temperature);
  schedule.decay = field_or(request, "decay", schedule.decay);
  auto searcher = std::shared_ptr<Searcher>(make_searcher(job->algorithm, schedule));
  if (job->budget < 1) throw ArgumentError("budget must be at least 1");

  {
    std::unique_lock lock(registry_mutex_);
    job->id = next_id("job");
    jobs_.emplace(job->id, job);
  }

  pool_.submit([job, searcher, filter] {
    {
      std::lock_guard lock(job->mutex);
      job->status = JobStatus::running;
    }
    try {
      const Dataset& ds = job->data->dataset;
      const auto space = SearchSpace::from_filter(ds, filter);
      DatasetEvaluator base(ds, space, job->objective);
      ProgressEvaluator progress(base, job->objective,
                                 [&job](std::optional<double> best) {
                                   std::lock_guard lock(job->mutex);
                                   ++job->evaluations;
                                   job->best_so_far = best;
                                 });
      auto trace = searcher->run(progress, space, job->objective, job->budget,
                                 job->seed);
      std::lock_guard lock(job->mutex);
      job->trace = std::move(trace);
      job->status = JobStatus::finished;
    } catch (const std::exception& e) {
      std::lock_guard lock(job->mutex);
      job->error = e.what();
      job->status = JobStatus::failed;
      spdlog::warn("job {} failed: {}", job->id, e.what());
    }
    job->done.notify_all();
  });

  return {{"job_id", job->id}, {"status", "queued"}};
}

Json Service::get_job(const std::string& job_id) const {
  const auto job = find_job(job_id);
  std::lock_guard lock(job->mutex);
  const Dataset& ds = job->data->dataset;
  return {{"job_id", job->id},
          {"session_id", job->session_id},
          {"status", std::string(to_string(job->status))},
          {"algorithm", job->algorithm},
          {"objective", std::string(ice::to_string(job->objective))},
          {"budget", job->budget},
          {"seed", job->seed},
          {"progress",
           {{"evaluations", job->evaluations},
            {"best_so_far", job->best_so_far ? Json(wire::real(*job->best_so_far))
                                             : Json(nullptr)}}},
          {"trace", job->trace ? wire::trace_to_json(ds, *job->trace) : Json(nullptr)},
          {"error", job->error.empty() ? Json(nullptr) : Json(job->error)}};
}

Json Service::wait_job(const std::string& job_id) const {
  const auto job = find_job(job_id);
  {
    std::unique_lock lock(job->mutex);
    job->done.wait(lock, [&] {
      return job->status == JobStatus::finished || job->status == JobStatus::failed;
    });
  }
  return get_job(job_id);
}

Json Service::importance(const std::string& session_id, const Json& request) const {
  const auto session = find_session(session_id);
  const auto fractions = field_or<std::vector<double>>(
      request, "fractions", {0.001, 0.002, 0.004, 0.01});
  const auto repeats = field_or<std::size_t>(request, "repeats", 1000);
  const auto seed = field_or<std::uint64_t>(request, "seed", config_.seed);
  const Dataset& ds = session->dataset();
  return wire::report_to_json(ds, recovery_experiment(ds, fractions, repeats, seed));
}

Json Service::export_session(const std::string& session_id) const {
  const auto session = find_session(session_id);
  std::lock_guard lock(session->mutex);
  Json doc = {{"format", "ice-session"}, {"version", 1}};
  doc.update(session_snapshot(*session));
  return doc;
}

Json Service::import_session(const Json& document) {
  if (document.value("format", "") != "ice-session") {
    throw ArgumentError("not an ice-session document");
  }
  const auto data = find_dataset(document.at("dataset_id").get<std::string>());
  const Dataset& ds = data->dataset;
  if (wire::schema_to_json(ds) != document.at("schema")) {
    throw ArgumentError("session document schema does not match the dataset");
  }
  auto session = std::make_shared<Session>();
  session->data = data;
  session->options.cuts = document.at("cuts").get<std::vector<double>>();
  session->options.grid_points = document.at("grid_points").get<std::size_t>();
  validate_cuts(session->options.cuts);
  session->plan = wire::sample_plan_from_json(ds, document.at("sample_plan"));
  session->filter = wire::filter_from_json(ds, document.at("filter"));
  session->log = wire::provenance_from_json(ds, document.at("provenance"));
  {
    std::unique_lock lock(registry_mutex_);
    session->id = next_id("s");
    sessions_.emplace(session->id, session);
  }
  return session_snapshot(*session);
}

}  // namespace ice::service
