#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ice/error.hpp"
#include "ice/service/wire.hpp"

namespace ice::service {

using wire::Json;

/// Error with an HTTP status. Other ice::Error subclasses are mapped by
/// error_response().
class ApiError : public Error {
 public:
  ApiError(int status, const std::string& message)
      : Error(message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// Status code and {"error": {...}} body for any exception escaping a handler.
std::pair<int, Json> error_response(const std::exception& e);

struct ServiceConfig {
  std::size_t workers = 2;
  std::vector<double> cuts = kDefaultCuts;
  std::vector<double> ladder = kDefaultLadder;
  double threshold = kDefaultPValueThreshold;
  std::uint64_t seed = 0;
  std::size_t grid_points = kDefaultGridPoints;
};

/// Fixed-size pool running queued tasks in FIFO order.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void submit(std::function<void()> task);

 private:
  void run();

  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<std::function<void()>> queue_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

/// Transport-independent session service. Every method takes and returns
/// wire JSON; HttpServer maps them onto routes. Thread-safe: sessions are
/// mutated under their own lock, datasets are shared read-only.
class Service {
 public:
  explicit Service(ServiceConfig config = {});
  ~Service();

  Json create_dataset(std::string_view csv, const std::string& target_column);
  Json get_dataset(const std::string& dataset_id) const;
  Json list_datasets() const;

  /// {dataset_id, cuts?, ladder?, threshold?, seed?, grid_points?}
  Json create_session(const Json& request);
  Json get_session(const std::string& session_id) const;
  Json get_explorer(const std::string& session_id) const;
  Json get_aggregate(const std::string& session_id) const;
  Json get_provenance(const std::string& session_id) const;

  /// Delta fields, applied in this order: expression, select_only,
  /// toggle_parameters, toggle_levels; optional label overrides the
  /// generated stage label. Always appends one provenance stage.
  Json apply_filter(const std::string& session_id, const Json& delta);
  Json rollback(const std::string& session_id, std::size_t stage);

  /// {algorithm, objective, budget, seed, initial_temperature?, decay?}
  /// Searches the session's active filter space on a worker thread.
  Json start_search(const std::string& session_id, const Json& request);
  Json get_job(const std::string& job_id) const;
  /// Blocks until the job leaves the queued/running states.
  Json wait_job(const std::string& job_id) const;

  /// {fractions?, repeats?, seed?}
  Json importance(const std::string& session_id, const Json& request) const;

  Json export_session(const std::string& session_id) const;
  Json import_session(const Json& document);

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  struct DatasetEntry;
  struct Session;
  struct Job;

  std::shared_ptr<const DatasetEntry> find_dataset(const std::string& id) const;
  std::shared_ptr<Session> find_session(const std::string& id) const;
  std::shared_ptr<Job> find_job(const std::string& id) const;
  std::string next_id(std::string_view prefix);

  Json session_snapshot(const Session& session) const;
  Json view_payload(const Session& session) const;

  ServiceConfig config_;
  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<const DatasetEntry>> datasets_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::uint64_t counter_ = 0;
  WorkerPool pool_;
};

}  // namespace ice::service
