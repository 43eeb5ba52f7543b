#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ice/error.hpp"
#include "ice/optimizer.hpp"
#include "oracles.hpp"

using namespace ice;

namespace {

Dataset two_level(double base = 50) {
  SyntheticSpec spec;
  spec.parameters = {{"Mode", {"A", "B"}, false}};
  spec.level_effects = {{10, 0}};
  spec.rows = 20;
  spec.base = base;
  return generate_synthetic(spec, 0).dataset;
}

SyntheticSpec planted_four(double noise) {
  SyntheticSpec spec;
  spec.parameters = {{"W", {"a", "b", "c", "d", "e", "f"}, false},
                     {"X", {"a", "b", "c", "d", "e"}, false},
                     {"Y", {"a", "b", "c", "d"}, false},
                     {"Z", {"a", "b", "c"}, false}};
  spec.level_effects = {{3, 9, 1, 0, 12, 5}, {0, 4, 7, 2, 1}, {1, 0, 3, 2}, {0.5, 0, 1}};
  spec.rows = 360 * 3;
  spec.repeat_runs = 3;
  spec.noise_sd = noise;
  spec.base = 100;
  return spec;
}

/// Configuration-level value by brute force over all rows.
std::optional<double> brute_value(const Dataset& ds, const std::vector<std::size_t>& params,
                                  const Configuration& config, ObjectiveKind kind) {
  std::vector<double> v;
  for (std::size_t r = 0; r < ds.row_count(); ++r) {
    bool match = true;
    for (std::size_t i = 0; i < params.size(); ++i) {
      match = match && ds.level_of(params[i], r) == config[i];
    }
    if (match) v.push_back(ds.target()[r]);
  }
  if (v.empty()) return std::nullopt;
  const auto s = oracle::sorted_summary(v, {});
  switch (kind) {
    case ObjectiveKind::maximize_mean:
      return static_cast<double>(s.mean);
    case ObjectiveKind::maximize_max:
      return s.max;
    case ObjectiveKind::minimize_range:
      return s.max - s.min;
  }
  return std::nullopt;
}

void expect_monotone(const SearchTrace& t) {
  std::optional<double> prev;
  for (const auto& s : t.steps) {
    if (prev) {
      ASSERT_TRUE(s.best_so_far.has_value());
      if (maximizes(t.objective)) {
        EXPECT_GE(*s.best_so_far, *prev);
      } else {
        EXPECT_LE(*s.best_so_far, *prev);
      }
    }
    if (s.best_so_far) prev = s.best_so_far;
  }
}

}  // namespace

TEST(Objective, NamesRoundTrip) {
  for (auto k : {ObjectiveKind::maximize_mean, ObjectiveKind::maximize_max,
                 ObjectiveKind::minimize_range}) {
    EXPECT_EQ(objective_from_string(to_string(k)), k);
  }
  EXPECT_THROW(objective_from_string("fastest"), ArgumentError);
}

TEST(Evaluator, MatchesBruteForceGroups) {
  std::mt19937_64 rng(31);
  const auto ds = oracle::random_dataset(rng, 3, 2, 4, 300);
  const auto space = SearchSpace::full(ds);
  for (auto kind : {ObjectiveKind::maximize_mean, ObjectiveKind::maximize_max,
                    ObjectiveKind::minimize_range}) {
    DatasetEvaluator eval(ds, space, kind);
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto config = space.at(i);
      const auto got = eval.evaluate(config);
      const auto want = brute_value(ds, space.parameters, config, kind);
      ASSERT_EQ(got.has_value(), want.has_value());
      if (got) EXPECT_NEAR(*got, *want, 1e-9 * std::max(1.0, std::abs(*want)));
    }
  }
}

TEST(SearchSpace, FromFilterKeepsEnabledParametersAndSelectedLevels) {
  const auto ds = generate_synthetic(planted_four(1), 1).dataset;
  const auto f = parse_filter_expression(ds, "W=b,e;!Y");
  const auto space = SearchSpace::from_filter(ds, f);
  EXPECT_EQ(space.parameters, (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_EQ(space.levels[0], (std::vector<LevelCode>{1, 4}));
  EXPECT_EQ(space.size(), 2u * 5 * 3);
  EXPECT_EQ(space.at(0), (Configuration{1, 0, 0}));
  EXPECT_EQ(space.at(29), (Configuration{4, 4, 2}));
}

TEST(Exhaustive, PlantedSingleParameterOptimum) {
  const auto ds = two_level();
  const auto best = exhaustive_best(ds, ObjectiveKind::maximize_mean);
  EXPECT_EQ(best.configuration, (Configuration{0}));
  EXPECT_EQ(best.value, 60);
}

TEST(Exhaustive, MatchesGeneratorGroundTruth) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto gen = generate_synthetic(planted_four(0.5), seed);
    const auto best = exhaustive_best(gen.dataset, ObjectiveKind::maximize_mean);
    EXPECT_EQ(best.configuration, gen.truth.best_configuration);
    EXPECT_EQ(best.feasible, 360u);
  }
}

TEST(Exhaustive, SingletonRangeIsMinimal) {
  const auto full = generate_synthetic(planted_four(2.0), 3).dataset;
  // Keep every row except two of the three repeats of configuration 100.
  std::vector<std::vector<LevelCode>> codes(full.parameter_count());
  std::vector<double> y;
  for (std::size_t r = 0; r < full.row_count(); ++r) {
    if (r == 301 || r == 302) continue;
    for (std::size_t p = 0; p < full.parameter_count(); ++p) codes[p].push_back(full.level_of(p, r));
    y.push_back(full.target()[r]);
  }
  const auto ds = Dataset::from_codes(full.parameters(), "t", y, codes);
  const auto best = exhaustive_best(ds, ObjectiveKind::minimize_range);
  EXPECT_EQ(best.value, 0.0);
  EXPECT_EQ(best.configuration, decode_configuration(ds.parameters(), 100));
}

TEST(Exhaustive, TiesKeepEnumerationOrder) {
  const std::vector<ParameterSchema> schema = {{"A", {"x", "y"}, false}, {"B", {"p", "q"}, false}};
  const auto ds = Dataset::from_codes(schema, "t", {5, 7, 7, 1}, {{0, 0, 1, 1}, {0, 1, 0, 1}});
  const auto best = exhaustive_best(ds, ObjectiveKind::maximize_mean);
  EXPECT_EQ(best.configuration, (Configuration{0, 1}));
}

TEST(Exhaustive, CapAndInfeasibility) {
  const auto ds = generate_synthetic(planted_four(1), 1).dataset;
  EXPECT_THROW(exhaustive_best(ds, ObjectiveKind::maximize_mean, 100), SearchError);
  auto space = SearchSpace::full(ds);
  space.levels[0].clear();
  DatasetEvaluator eval(ds, SearchSpace::full(ds), ObjectiveKind::maximize_mean);
  EXPECT_THROW(exhaustive_best(eval, space, ObjectiveKind::maximize_mean), SearchError);
}

TEST(Exhaustive, ArgmaxInvariantUnderAffineTransform) {
  const auto gen = generate_synthetic(planted_four(4), 7);
  const auto& ds = gen.dataset;
  std::vector<double> scaled;
  for (double y : ds.target()) scaled.push_back(3 * y + 17);
  std::vector<std::vector<LevelCode>> codes;
  for (std::size_t p = 0; p < ds.parameter_count(); ++p) {
    codes.emplace_back(ds.level_column(p).begin(), ds.level_column(p).end());
  }
  const auto other = Dataset::from_codes(ds.parameters(), "t", scaled, codes);
  for (auto kind : {ObjectiveKind::maximize_mean, ObjectiveKind::maximize_max,
                    ObjectiveKind::minimize_range}) {
    EXPECT_EQ(exhaustive_best(ds, kind).configuration, exhaustive_best(other, kind).configuration);
  }
}

TEST(Exhaustive, TraceHasOneStepPerConfiguration) {
  const auto ds = generate_synthetic(planted_four(1), 2).dataset;
  const auto space = SearchSpace::full(ds);
  DatasetEvaluator eval(ds, space, ObjectiveKind::maximize_mean);
  const auto trace = exhaustive_search(eval, space, ObjectiveKind::maximize_mean);
  EXPECT_EQ(trace.steps.size(), 360u);
  EXPECT_EQ(trace.evaluations, 360u);
  EXPECT_EQ(*trace.best_value, exhaustive_best(eval, space, ObjectiveKind::maximize_mean).value);
  expect_monotone(trace);
}

TEST(RandomSearch, BudgetOneAndDeterminism) {
  const auto ds = generate_synthetic(planted_four(1), 2).dataset;
  const auto one = random_search(ds, ObjectiveKind::maximize_mean, 1, 5);
  EXPECT_EQ(one.steps.size(), 1u);
  auto a = random_search(ds, ObjectiveKind::maximize_mean, 50, 9);
  auto b = random_search(ds, ObjectiveKind::maximize_mean, 50, 9);
  a.wall_seconds = b.wall_seconds = 0;
  EXPECT_EQ(a, b);
  expect_monotone(a);
}

TEST(RandomSearch, TinySpaceReachesExhaustiveBest) {
  SyntheticSpec spec;
  spec.parameters = {{"A", {"0", "1"}, false}, {"B", {"0", "1"}, false}, {"C", {"0", "1"}, false}};
  spec.level_effects = {{0, 3}, {1, 0}, {0, 2}};
  spec.rows = 8 * 4;
  spec.repeat_runs = 4;
  spec.noise_sd = 0.5;
  const auto ds = generate_synthetic(spec, 4).dataset;
  const auto best = exhaustive_best(ds, ObjectiveKind::maximize_mean);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = random_search(ds, ObjectiveKind::maximize_mean, 64, seed);
    hits += *t.best_value == best.value;
    EXPECT_LE(*t.best_value, best.value);
  }
  EXPECT_EQ(hits, 20);
}

TEST(RandomSearch, InfeasibleDrawsConsumeBudget) {
  const std::vector<ParameterSchema> schema = {{"A", {"x", "y"}, false}, {"B", {"p", "q"}, false}};
  const auto ds = Dataset::from_codes(schema, "t", {1, 2}, {{0, 1}, {0, 1}});
  const auto t = random_search(ds, ObjectiveKind::maximize_mean, 40, 1);
  EXPECT_EQ(t.steps.size(), 40u);
  const auto infeasible = std::count_if(t.steps.begin(), t.steps.end(),
                                        [](const TraceStep& s) { return !s.value; });
  EXPECT_GT(infeasible, 0);
  EXPECT_EQ(*t.best_value, 2);
}

TEST(Annealing, ZeroTemperatureNeverAcceptsWorse) {
  const auto ds = generate_synthetic(planted_four(3), 5).dataset;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto t = simulated_annealing(ds, ObjectiveKind::maximize_mean, 200, seed,
                                       AnnealingSchedule{1e-12, 0.95});
    for (std::size_t i = 1; i < t.steps.size(); ++i) {
      const auto& s = t.steps[i];
      if (s.accepted) {
        EXPECT_GE(*s.value, *t.steps[i - 1].current);
      }
      EXPECT_GE(*s.current, *t.steps[i - 1].current);
    }
    expect_monotone(t);
  }
}

TEST(Annealing, Deterministic) {
  const auto ds = generate_synthetic(planted_four(3), 5).dataset;
  auto a = simulated_annealing(ds, ObjectiveKind::minimize_range, 100, 3);
  auto b = simulated_annealing(ds, ObjectiveKind::minimize_range, 100, 3);
  a.wall_seconds = b.wall_seconds = 0;
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.steps.size(), 100u);
  expect_monotone(a);
}

TEST(Annealing, TenPercentBudgetReachesNinetyFivePercent) {
  const auto gen = generate_synthetic(planted_four(1), 6);
  const auto best = exhaustive_best(gen.dataset, ObjectiveKind::maximize_mean);
  int good_sa = 0, good_random = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sa = simulated_annealing(gen.dataset, ObjectiveKind::maximize_mean, 36, seed);
    const auto rs = random_search(gen.dataset, ObjectiveKind::maximize_mean, 36, seed);
    good_sa += *sa.best_value >= 0.95 * best.value;
    good_random += *rs.best_value >= 0.95 * best.value;
    EXPECT_LE(*sa.best_value, best.value);
  }
  EXPECT_GE(good_sa, 9);
  EXPECT_GE(good_random, 9);
}

TEST(Annealing, SparseSpaceChargesRejectionsAndFinishes) {
  // Only the diagonal of a 6x6 space is measured.
  const std::vector<ParameterSchema> schema = {
      {"A", {"0", "1", "2", "3", "4", "5"}, false}, {"B", {"0", "1", "2", "3", "4", "5"}, false}};
  std::vector<std::vector<LevelCode>> codes(2);
  std::vector<double> y;
  for (LevelCode l = 0; l < 6; ++l) {
    codes[0].push_back(l);
    codes[1].push_back(l);
    y.push_back(l);
  }
  const auto ds = Dataset::from_codes(schema, "t", y, codes);
  const auto t = simulated_annealing(ds, ObjectiveKind::maximize_mean, 30, 2);
  EXPECT_EQ(t.steps.size(), 30u);
  EXPECT_TRUE(t.steps.front().value.has_value());
  for (std::size_t i = 1; i < t.steps.size(); ++i) EXPECT_FALSE(t.steps[i].value.has_value());
}

TEST(Annealing, NoFeasibleStart) {
  const std::vector<ParameterSchema> schema = {{"A", {"x", "y"}, false}};
  const auto ds = Dataset::from_codes(schema, "t", {1.0}, {{0}});
  auto space = SearchSpace::full(ds);
  space.levels[0] = {1};
  DatasetEvaluator eval(ds, SearchSpace::full(ds), ObjectiveKind::maximize_mean);
  EXPECT_THROW(simulated_annealing(eval, space, ObjectiveKind::maximize_mean, 5, 0, {}), SearchError);
}

TEST(Annealing, ScheduleValidation) {
  const auto ds = two_level();
  EXPECT_THROW(simulated_annealing(ds, ObjectiveKind::maximize_mean, 5, 0, AnnealingSchedule{0, 0.9}),
               ArgumentError);
  EXPECT_THROW(simulated_annealing(ds, ObjectiveKind::maximize_mean, 5, 0, AnnealingSchedule{1, 1}),
               ArgumentError);
  EXPECT_THROW(simulated_annealing(ds, ObjectiveKind::maximize_mean, 0, 0), ArgumentError);
}

TEST(Searchers, FactoryNamesAndOptimalityBound) {
  const auto gen = generate_synthetic(planted_four(2), 8);
  const auto space = SearchSpace::full(gen.dataset);
  for (auto kind : {ObjectiveKind::maximize_mean, ObjectiveKind::minimize_range}) {
    DatasetEvaluator eval(gen.dataset, space, kind);
    const double opt = exhaustive_best(eval, space, kind).value;
    for (const char* name : {"exhaustive", "random", "annealing", "sa"}) {
      auto searcher = make_searcher(name, default_schedule(gen.dataset));
      const auto t = searcher->run(eval, space, kind, 50, 1);
      expect_monotone(t);
      if (maximizes(kind)) {
        EXPECT_LE(*t.best_value, opt);
      } else {
        EXPECT_GE(*t.best_value, opt);
      }
    }
  }
  EXPECT_THROW(make_searcher("genetic", {}), ArgumentError);
}
