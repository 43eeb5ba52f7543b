#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ice/dataset.hpp"
#include "ice/filter.hpp"

namespace ice {

enum class ObjectiveKind { maximize_mean, maximize_max, minimize_range };

std::string_view to_string(ObjectiveKind kind);
ObjectiveKind objective_from_string(std::string_view name);
inline bool maximizes(ObjectiveKind kind) {
  return kind != ObjectiveKind::minimize_range;
}
/// True when a is strictly better than b under kind.
inline bool better(ObjectiveKind kind, double a, double b) {
  return maximizes(kind) ? a > b : a < b;
}

/// One chosen level per searched parameter, aligned with
/// SearchSpace::parameters.
using Configuration = std::vector<LevelCode>;

/// The parameters a search varies and the levels each may take. Parameters
/// outside the space are left free: a configuration matches rows with any
/// level there.
struct SearchSpace {
  std::vector<std::size_t> parameters;
  std::vector<std::vector<LevelCode>> levels;

  static SearchSpace full(const Dataset& dataset);
  /// Enabled parameters, restricted to their selected levels.
  static SearchSpace from_filter(const Dataset& dataset,
                                 const FilterState& filter);

  /// Cross-product size, saturating at SIZE_MAX.
  std::size_t size() const noexcept;
  /// Configuration at position index of the enumeration order (first
  /// parameter most significant, levels in schema order).
  Configuration at(std::size_t index) const;
  bool operator==(const SearchSpace&) const = default;
};

/// Black-box scoring of configurations. Returns nullopt for infeasible
/// configurations (no measurements).
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual std::optional<double> evaluate(const Configuration& config) = 0;
};

/// Looks configurations up in a measured dataset: the objective is computed
/// over the target of every row matching the configuration. Rows are grouped
/// once at construction.
class DatasetEvaluator final : public Evaluator {
 public:
  DatasetEvaluator(const Dataset& dataset, SearchSpace space,
                   ObjectiveKind objective);

  std::optional<double> evaluate(const Configuration& config) override;

  const SearchSpace& space() const noexcept { return space_; }
  ObjectiveKind objective() const noexcept { return objective_; }
  std::size_t feasible_count() const noexcept { return groups_.size(); }

 private:
  struct Group {
    std::size_t count = 0;
    double sum = 0.0;
    double min = 0.0;
    double max = 0.0;
  };
  std::string key(const Configuration& config) const;

  SearchSpace space_;
  ObjectiveKind objective_;
  std::unordered_map<std::string, Group> groups_;
};

struct TraceStep {
  std::size_t step = 0;  // 1-based evaluation count
  Configuration configuration;
  std::optional<double> value;  // nullopt: infeasible
  bool accepted = false;        // became the current configuration
  std::optional<double> current;
  std::optional<double> best_so_far;

  bool operator==(const TraceStep&) const = default;
};

struct SearchTrace {
  std::string algorithm;
  ObjectiveKind objective = ObjectiveKind::maximize_mean;
  std::vector<std::size_t> parameters;  // dataset indices of the space
  std::vector<TraceStep> steps;
  std::size_t evaluations = 0;
  double wall_seconds = 0.0;
  std::optional<Configuration> best_configuration;
  std::optional<double> best_value;

  bool operator==(const SearchTrace&) const = default;
};

inline constexpr std::size_t kDefaultExhaustiveCap = 1'000'000;

struct ExhaustiveResult {
  Configuration configuration;
  double value = 0.0;
  std::size_t evaluated = 0;
  std::size_t feasible = 0;
};

/// Evaluates the whole cross-product; ties keep the earliest configuration in
/// enumeration order. Throws SearchError if the space exceeds cap or nothing
/// is feasible.
ExhaustiveResult exhaustive_best(Evaluator& evaluator, const SearchSpace& space,
                                 ObjectiveKind objective,
                                 std::size_t cap = kDefaultExhaustiveCap);
ExhaustiveResult exhaustive_best(const Dataset& dataset, ObjectiveKind objective,
                                 std::size_t cap = kDefaultExhaustiveCap);

/// Exhaustive enumeration recorded as a trace (one step per configuration).
SearchTrace exhaustive_search(Evaluator& evaluator, const SearchSpace& space,
                              ObjectiveKind objective,
                              std::size_t cap = kDefaultExhaustiveCap);

/// budget independent uniform draws; infeasible draws consume budget.
SearchTrace random_search(Evaluator& evaluator, const SearchSpace& space,
                          ObjectiveKind objective, std::size_t budget,
                          std::uint64_t seed);
SearchTrace random_search(const Dataset& dataset, ObjectiveKind objective,
                          std::size_t budget, std::uint64_t seed);

/// Geometric cooling: T_k = initial_temperature * decay^k.
struct AnnealingSchedule {
  double initial_temperature = 1.0;
  double decay = 0.95;
};

/// Schedule with T0 = standard deviation of the full target.
AnnealingSchedule default_schedule(const Dataset& dataset);

inline constexpr int kMaxStartAttempts = 100;
inline constexpr int kRejectionsPerEvaluation = 10;

/// Simulated annealing over single-parameter moves. An infeasible neighbour
/// is rejected without consuming budget, except that every
/// kRejectionsPerEvaluation consecutive rejections consume one evaluation.
/// Throws SearchError if no feasible start is found in kMaxStartAttempts.
SearchTrace simulated_annealing(Evaluator& evaluator, const SearchSpace& space,
                                ObjectiveKind objective, std::size_t budget,
                                std::uint64_t seed,
                                const AnnealingSchedule& schedule);
SearchTrace simulated_annealing(const Dataset& dataset, ObjectiveKind objective,
                                std::size_t budget, std::uint64_t seed,
                                std::optional<AnnealingSchedule> schedule = {});

/// Common signature for budgeted searchers so further algorithms can plug in.
class Searcher {
 public:
  virtual ~Searcher() = default;
  virtual std::string_view name() const = 0;
  virtual SearchTrace run(Evaluator& evaluator, const SearchSpace& space,
                          ObjectiveKind objective, std::size_t budget,
                          std::uint64_t seed) = 0;
};

/// "exhaustive", "random" or "annealing". schedule only affects annealing.
std::unique_ptr<Searcher> make_searcher(std::string_view algorithm,
                                        const AnnealingSchedule& schedule);

}  // namespace ice
