#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "ice/error.hpp"
#include "ice/service/wire.hpp"
#include "ice/synthetic.hpp"
#include "oracles.hpp"

using namespace ice;
using wire::Json;

namespace {

const Dataset& storage() {
  static const Dataset ds = generate_synthetic(fixture::storage_spec(5400), 4).dataset;
  return ds;
}

// Encoding, decoding and re-encoding must give identical bytes: the first
// encode already rounded every real, so decoding loses nothing.
template <class Encode, class Decode>
void expect_stable(const Json& first, Encode encode, Decode decode) {
  const auto decoded = decode(first);
  EXPECT_EQ(encode(decoded).dump(), first.dump());
  EXPECT_EQ(decode(encode(decoded)), decoded);
}

}  // namespace

TEST(WireReal, TwelveSignificantDigits) {
  EXPECT_EQ(wire::format_real(1.0), "1");
  EXPECT_EQ(wire::format_real(0.1 + 0.2), "0.3");
  EXPECT_EQ(wire::format_real(1.0 / 3), "0.333333333333");
  EXPECT_EQ(wire::format_real(-2.5e-20), "-2.5e-20");
  EXPECT_EQ(wire::real(0.1 + 0.2), 0.3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double r = wire::real(u(rng));
    EXPECT_EQ(wire::real(r), r);
    EXPECT_EQ(std::strtod(wire::format_real(r).c_str(), nullptr), r);
  }
}

TEST(WireRoundTrip, Stats) {
  std::vector<double> v(storage().target().begin(), storage().target().end());
  const auto s = summarize(v);
  expect_stable(wire::to_json(s), [](const auto& x) { return wire::to_json(x); },
                wire::stat_summary_from_json);
  expect_stable(wire::to_json(kde_density(v)),
                [](const auto& x) { return wire::to_json(x); }, wire::density_from_json);
  std::vector<double> half(v.begin(), v.begin() + 1000);
  expect_stable(wire::to_json(ks_two_sample(v, half)),
                [](const auto& x) { return wire::to_json(x); }, wire::ks_from_json);
  const auto empty = wire::to_json(summarize(std::vector<double>{}));
  EXPECT_EQ(wire::stat_summary_from_json(empty).count, 0u);
}

TEST(WireRoundTrip, SamplePlan) {
  const auto& ds = storage();
  auto plan = choose_sample_size(ds, kDefaultLadder, kDefaultPValueThreshold, 3);
  const auto j = wire::to_json(plan);
  const auto back = wire::sample_plan_from_json(ds, j);
  EXPECT_EQ(back.row_subset, plan.row_subset);
  EXPECT_EQ(back.reason, plan.reason);
  EXPECT_EQ(wire::to_json(back).dump(), j.dump());

  const auto big = generate_synthetic(fixture::storage_spec(60000), 5).dataset;
  for (double threshold : {0.5, 1.1}) {
    const auto p = choose_sample_size(big, kDefaultLadder, threshold, 9);
    const auto jp = wire::to_json(p);
    const auto bp = wire::sample_plan_from_json(big, jp);
    EXPECT_EQ(bp.row_subset, p.row_subset);
    EXPECT_EQ(bp.trials.size(), p.trials.size());
    EXPECT_EQ(wire::to_json(bp).dump(), jp.dump());
  }
  auto tampered = wire::to_json(choose_sample_size(big, kDefaultLadder, 0.5, 9));
  tampered["sampled_rows"] = 7;
  EXPECT_THROW(wire::sample_plan_from_json(big, tampered), ArgumentError);
}

TEST(WireRoundTrip, FiltersAndSummaries) {
  const auto& ds = storage();
  const auto all = RowMask::all(ds.row_count());
  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    const auto f = oracle::random_filter(rng, ds);
    const auto jf = wire::filter_to_json(ds, f);
    EXPECT_EQ(wire::filter_from_json(ds, jf), f);
    EXPECT_EQ(wire::filter_to_json(ds, wire::filter_from_json(ds, jf)).dump(), jf.dump());

    const auto bars = explorer_summaries(ds, f, all);
    expect_stable(
        wire::explorer_to_json(ds, bars),
        [&](const auto& x) { return wire::explorer_to_json(ds, x); },
        [&](const Json& j) { return wire::explorer_from_json(ds, j); });
    expect_stable(wire::to_json(aggregate_summary(ds, f, all)),
                  [](const auto& x) { return wire::to_json(x); }, wire::aggregate_from_json);
  }
}

TEST(WireRoundTrip, Provenance) {
  const auto& ds = storage();
  auto log = fixture::walkthrough_log(ds, RowMask::all(ds.row_count()));
  log.rollback(2);
  const auto j = wire::provenance_to_json(ds, log);
  expect_stable(
      j, [&](const auto& x) { return wire::provenance_to_json(ds, x); },
      [&](const Json& x) { return wire::provenance_from_json(ds, x); });
  const auto back = wire::provenance_from_json(ds, j);
  EXPECT_EQ(back.size(), log.size());
  EXPECT_EQ(back.back().replicated_from, std::optional<std::size_t>(2));
  for (std::size_t k = 1; k <= log.size(); ++k) {
    EXPECT_EQ(back.stage(k).filter, log.stage(k).filter);
    EXPECT_EQ(back.stage(k).label, log.stage(k).label);
  }
}

TEST(WireRoundTrip, TracesAndConfigurations) {
  const auto& ds = storage();
  std::vector<SearchTrace> traces = {
      random_search(ds, ObjectiveKind::maximize_mean, 40, 1),
      simulated_annealing(ds, ObjectiveKind::minimize_range, 40, 2),
  };
  DatasetEvaluator eval(ds, SearchSpace::full(ds), ObjectiveKind::maximize_max);
  traces.push_back(exhaustive_search(eval, SearchSpace::full(ds), ObjectiveKind::maximize_max));
  for (const auto& t : traces) {
    expect_stable(
        wire::trace_to_json(ds, t), [&](const auto& x) { return wire::trace_to_json(ds, x); },
        [&](const Json& x) { return wire::trace_from_json(ds, x); });
    const auto back = wire::trace_from_json(ds, wire::trace_to_json(ds, t));
    EXPECT_EQ(back.best_configuration, t.best_configuration);
    EXPECT_EQ(back.steps.size(), t.steps.size());
  }
  std::vector<std::size_t> params = {0, 3};
  const Configuration c = {2, 1};
  const auto jc = wire::configuration_to_json(ds, params, c);
  EXPECT_EQ(jc.dump(), R"({"Workload":"mailsrvr","InodeSize":"256"})");
  EXPECT_EQ(wire::configuration_from_json(ds, params, jc), c);
}

TEST(WireRoundTrip, Importance) {
  const auto& ds = storage();
  const auto report = recovery_experiment(ds, {0.05, 0.2}, 10, 1);
  expect_stable(
      wire::report_to_json(ds, report), [&](const auto& x) { return wire::report_to_json(ds, x); },
      [&](const Json& x) { return wire::report_from_json(ds, x); });
  expect_stable(
      wire::scores_to_json(ds, report.ground_truth),
      [&](const auto& x) { return wire::scores_to_json(ds, x); },
      [&](const Json& x) { return wire::scores_from_json(ds, x); });
}

TEST(WireSchema, NamesAndLevels) {
  const auto j = wire::schema_to_json(storage());
  EXPECT_EQ(j["target_name"], "throughput");
  EXPECT_EQ(j["row_count"], 5400);
  EXPECT_EQ(j["parameters"].size(), 6u);
  EXPECT_EQ(j["parameters"][0]["name"], "Workload");
  EXPECT_EQ(j["parameters"][1]["levels"][4], "btrfs");
}
