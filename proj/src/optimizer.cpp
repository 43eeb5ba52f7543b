#include "ice/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "ice/error.hpp"

namespace ice {

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::maximize_mean:
      return "maximize_mean";
    case ObjectiveKind::maximize_max:
      return "maximize_max";
    case ObjectiveKind::minimize_range:
      return "minimize_range";
  }
  return "unknown";
}

ObjectiveKind objective_from_string(std::string_view name) {
  for (auto k : {ObjectiveKind::maximize_mean, ObjectiveKind::maximize_max,
                 ObjectiveKind::minimize_range}) {
    if (to_string(k) == name) return k;
  }
  throw ArgumentError("unknown objective '" + std::string(name) +
                      "' (expected maximize_mean, maximize_max or "
                      "minimize_range)");
}

SearchSpace SearchSpace::full(const Dataset& dataset) {
  return from_filter(dataset, FilterState::unconstrained(dataset));
}

SearchSpace SearchSpace::from_filter(const Dataset& dataset,
                                     const FilterState& filter) {
  filter.validate(dataset);
  SearchSpace space;
  for (std::size_t p = 0; p < dataset.parameter_count(); ++p) {
    if (!filter.enabled(p)) continue;
    std::vector<LevelCode> allowed;
    for (auto l : filter.selected_levels(p)) {
      allowed.push_back(static_cast<LevelCode>(l));
    }
    space.parameters.push_back(p);
    space.levels.push_back(std::move(allowed));
  }
  return space;
}

std::size_t SearchSpace::size() const noexcept {
  std::size_t total = 1;
  for (const auto& l : levels) {
    if (l.empty()) return 0;
    if (total > std::numeric_limits<std::size_t>::max() / l.size()) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= l.size();
  }
  return total;
}

Configuration SearchSpace::at(std::size_t index) const {
  Configuration config(levels.size());
  for (std::size_t i = levels.size(); i-- > 0;) {
    config[i] = levels[i][index % levels[i].size()];
    index /= levels[i].size();
  }
  return config;
}

DatasetEvaluator::DatasetEvaluator(const Dataset& dataset, SearchSpace space,
                                   ObjectiveKind objective)
    : space_(std::move(space)), objective_(objective) {
  if (space_.parameters.size() != space_.levels.size()) {
    throw ArgumentError("search space parameters and levels disagree");
  }
  for (auto p : space_.parameters) {
    if (p >= dataset.parameter_count()) {
      throw SchemaError("search space references an unknown parameter");
    }
  }
  const auto target = dataset.target();
  Configuration config(space_.parameters.size());
  for (std::size_t r = 0; r < dataset.row_count(); ++r) {
    for (std::size_t i = 0; i < config.size(); ++i) {
      config[i] = dataset.level_of(space_.parameters[i], r);
    }
    Group& g = groups_[key(config)];
    const double v = target[r];
    if (g.count == 0) {
      g.min = v;
      g.max = v;
    } else {
      g.min = std::min(g.min, v);
      g.max = std::max(g.max, v);
    }
    g.sum += v;
    ++g.count;
  }
}

std::string DatasetEvaluator::key(const Configuration& config) const {
  return std::string(config.begin(), config.end());
}

std::optional<double> DatasetEvaluator::evaluate(const Configuration& config) {
  if (config.size() != space_.parameters.size()) {
    throw ArgumentError("configuration does not match the search space");
  }
  const auto it = groups_.find(key(config));
  if (it == groups_.end()) return std::nullopt;
  const Group& g = it->second;
  switch (objective_) {
    case ObjectiveKind::maximize_mean:
      return g.sum / static_cast<double>(g.count);
    case ObjectiveKind::maximize_max:
      return g.max;
    case ObjectiveKind::minimize_range:
      return g.max - g.min;
  }
  return std::nullopt;
}

namespace {

using Clock = std::chrono::steady_clock;

// Records one budget-consuming evaluation and maintains best-so-far.
class TraceRecorder {
 public:
  TraceRecorder(std::string algorithm, const SearchSpace& space,
                ObjectiveKind objective)
      : start_(Clock::now()) {
    trace_.algorithm = std::move(algorithm);
    trace_.objective = objective;
    trace_.parameters = space.parameters;
  }

  void record(const Configuration& config, std::optional<double> value,
              bool accepted, std::optional<double> current) {
    TraceStep step;
    step.step = trace_.steps.size() + 1;
    step.configuration = config;
    step.value = value;
    step.accepted = accepted;
    step.current = current;
    if (value && (!trace_.best_value ||
                  better(trace_.objective, *value, *trace_.best_value))) {
      trace_.best_value = value;
      trace_.best_configuration = config;
    }
    step.best_so_far = trace_.best_value;
    trace_.steps.push_back(std::move(step));
    trace_.evaluations = trace_.steps.size();
  }

  std::size_t evaluations() const noexcept { return trace_.steps.size(); }

  SearchTrace finish() {
    trace_.wall_seconds =
        std::chrono::duration<double>(Clock::now() - start_).count();
    return std::move(trace_);
  }

 private:
  SearchTrace trace_;
  Clock::time_point start_;
};

void require_searchable(const SearchSpace& space) {
  for (std::size_t i = 0; i < space.levels.size(); ++i) {
    if (space.levels[i].empty()) {
      throw SearchError("search space parameter has no allowed levels");
    }
  }
}

Configuration draw_uniform(const SearchSpace& space, std::mt19937_64& rng) {
  Configuration config(space.levels.size());
  for (std::size_t i = 0; i < config.size(); ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, space.levels[i].size() - 1);
    config[i] = space.levels[i][pick(rng)];
  }
  return config;
}

double target_sd(const Dataset& dataset) {
  const auto t = dataset.target();
  if (t.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : t) mean += v;
  mean /= static_cast<double>(t.size());
  double ss = 0.0;
  for (double v : t) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(t.size() - 1));
}

}  // namespace

ExhaustiveResult exhaustive_best(Evaluator& evaluator, const SearchSpace& space,
                                 ObjectiveKind objective, std::size_t cap) {
  require_searchable(space);
  const std::size_t size = space.size();
  if (size > cap) {
    throw SearchError("search space has " +
                      (size == std::numeric_limits<std::size_t>::max()
                           ? std::string("too many")
                           : std::to_string(size)) +
                      " configurations, above the cap of " + std::to_string(cap));
  }
  ExhaustiveResult result;
  bool found = false;
  for (std::size_t i = 0; i < size; ++i) {
    Configuration config = space.at(i);
    const auto value = evaluator.evaluate(config);
    ++result.evaluated;
    if (!value) continue;
    ++result.feasible;
    if (!found || better(objective, *value, result.value)) {
      result.value = *value;
      result.configuration = std::move(config);
      found = true;
    }
  }
  if (!found) throw SearchError("no feasible configuration in the search space");
  return result;
}

ExhaustiveResult exhaustive_best(const Dataset& dataset, ObjectiveKind objective,
                                 std::size_t cap) {
  auto space = SearchSpace::full(dataset);
  DatasetEvaluator evaluator(dataset, space, objective);
  return exhaustive_best(evaluator, space, objective, cap);
}

SearchTrace exhaustive_search(Evaluator& evaluator, const SearchSpace& space,
                              ObjectiveKind objective, std::size_t cap) {
  require_searchable(space);
  const std::size_t size = space.size();
  if (size > cap) {
    throw SearchError("search space exceeds the exhaustive cap of " +
                      std::to_string(cap));
  }
  TraceRecorder recorder("exhaustive", space, objective);
  for (std::size_t i = 0; i < size; ++i) {
    const Configuration config = space.at(i);
    const auto value = evaluator.evaluate(config);
    recorder.record(config, value, value.has_value(), value);
  }
  auto trace = recorder.finish();
  if (!trace.best_value) {
    throw SearchError("no feasible configuration in the search space");
  }
  return trace;
}

SearchTrace random_search(Evaluator& evaluator, const SearchSpace& space,
                          ObjectiveKind objective, std::size_t budget,
                          std::uint64_t seed) {
  if (budget < 1) throw ArgumentError("budget must be at least 1");
  require_searchable(space);
  std::mt19937_64 rng(seed);
  TraceRecorder recorder("random", space, objective);
  for (std::size_t i = 0; i < budget; ++i) {
    const Configuration config = draw_uniform(space, rng);
    const auto value = evaluator.evaluate(config);
    recorder.record(config, value, value.has_value(), value);
  }
  return recorder.finish();
}

SearchTrace random_search(const Dataset& dataset, ObjectiveKind objective,
                          std::size_t budget, std::uint64_t seed) {
  auto space = SearchSpace::full(dataset);
  DatasetEvaluator evaluator(dataset, space, objective);
  return random_search(evaluator, space, objective, budget, seed);
}

AnnealingSchedule default_schedule(const Dataset& dataset) {
  AnnealingSchedule schedule;
  const double sd = target_sd(dataset);
  schedule.initial_temperature = sd > 0.0 ? sd : 1.0;
  schedule.decay = 0.95;
  return schedule;
}

SearchTrace simulated_annealing(Evaluator& evaluator, const SearchSpace& space,
                                ObjectiveKind objective, std::size_t budget,
                                std::uint64_t seed,
                                const AnnealingSchedule& schedule) {
  if (budget < 1) throw ArgumentError("budget must be at least 1");
  if (!(schedule.initial_temperature > 0.0)) {
    throw ArgumentError("initial temperature must be positive");
  }
  if (!(schedule.decay > 0.0 && schedule.decay < 1.0)) {
    throw ArgumentError("temperature decay must lie in (0, 1)");
  }
  require_searchable(space);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TraceRecorder recorder("annealing", space, objective);

  Configuration current;
  std::optional<double> current_value;
  for (int attempt = 0; attempt < kMaxStartAttempts && !current_value; ++attempt) {
    current = draw_uniform(space, rng);
    current_value = evaluator.evaluate(current);
  }
  if (!current_value) {
    throw SearchError("no feasible start configuration after " +
                      std::to_string(kMaxStartAttempts) + " draws");
  }
  recorder.record(current, current_value, true, current_value);

  std::vector<std::size_t> movable;
  for (std::size_t i = 0; i < space.levels.size(); ++i) {
    if (space.levels[i].size() >= 2) movable.push_back(i);
  }

  double temperature = schedule.initial_temperature;
  int rejections = 0;
  while (recorder.evaluations() < budget) {
    Configuration neighbor = current;
    if (!movable.empty()) {
      std::uniform_int_distribution<std::size_t> pick_param(0, movable.size() - 1);
      const std::size_t i = movable[pick_param(rng)];
      const auto& levels = space.levels[i];
      std::size_t position = 0;
      while (levels[position] != current[i]) ++position;
      std::uniform_int_distribution<std::size_t> pick_level(0, levels.size() - 2);
      std::size_t choice = pick_level(rng);
      if (choice >= position) ++choice;
      neighbor[i] = levels[choice];
    }

    const auto value = evaluator.evaluate(neighbor);
    if (!value) {
      if (++rejections < kRejectionsPerEvaluation) continue;
      rejections = 0;
      recorder.record(neighbor, std::nullopt, false, current_value);
      temperature *= schedule.decay;
      continue;
    }
    rejections = 0;

    bool accept = !better(objective, *current_value, *value);
    if (!accept) {
      const double worsening = std::abs(*value - *current_value);
      accept = unit(rng) < std::exp(-worsening / temperature);
    }
    if (accept) {
      current = neighbor;
      current_value = value;
    }
    recorder.record(neighbor, value, accept, current_value);
    temperature *= schedule.decay;
  }
  return recorder.finish();
}

SearchTrace simulated_annealing(const Dataset& dataset, ObjectiveKind objective,
                                std::size_t budget, std::uint64_t seed,
                                std::optional<AnnealingSchedule> schedule) {
  auto space = SearchSpace::full(dataset);
  DatasetEvaluator evaluator(dataset, space, objective);
  return simulated_annealing(evaluator, space, objective, budget, seed,
                             schedule.value_or(default_schedule(dataset)));
}

namespace {

class ExhaustiveSearcher final : public Searcher {
 public:
  std::string_view name() const override { return "exhaustive"; }
  SearchTrace run(Evaluator& evaluator, const SearchSpace& space,
                  ObjectiveKind objective, std::size_t,
                  std::uint64_t) override {
    return exhaustive_search(evaluator, space, objective);
  }
};

class RandomSearcher final : public Searcher {
 public:
  std::string_view name() const override { return "random"; }
  SearchTrace run(Evaluator& evaluator, const SearchSpace& space,
                  ObjectiveKind objective, std::size_t budget,
                  std::uint64_t seed) override {
    return random_search(evaluator, space, objective, budget, seed);
  }
};

class AnnealingSearcher final : public Searcher {
 public:
  explicit AnnealingSearcher(AnnealingSchedule schedule) : schedule_(schedule) {}
  std::string_view name() const override { return "annealing"; }
  SearchTrace run(Evaluator& evaluator, const SearchSpace& space,
                  ObjectiveKind objective, std::size_t budget,
                  std::uint64_t seed) override {
    return simulated_annealing(evaluator, space, objective, budget, seed,
                               schedule_);
  }

 private:
  AnnealingSchedule schedule_;
};

}  // namespace

std::unique_ptr<Searcher> make_searcher(std::string_view algorithm,
                                        const AnnealingSchedule& schedule) {
  if (algorithm == "exhaustive") return std::make_unique<ExhaustiveSearcher>();
  if (algorithm == "random") return std::make_unique<RandomSearcher>();
  if (algorithm == "annealing" || algorithm == "sa") {
    return std::make_unique<AnnealingSearcher>(schedule);
  }
  throw ArgumentError("unknown algorithm '" + std::string(algorithm) +
                      "' (expected exhaustive, random or annealing)");
}

}  // namespace ice
