#include "ice/importance.hpp"

#include <algorithm>
#include <numeric>

#include "ice/error.hpp"
#include "ice/sampling.hpp"

namespace ice {

namespace {

ImportanceScores score_rows(const Dataset& dataset,
                            const std::vector<std::size_t>& parameters,
                            const std::vector<std::size_t>& rows) {
  ImportanceScores out;
  out.parameters = parameters;
  out.scores.assign(parameters.size(), 0.0);
  out.sample_rows = rows.size();
  if (rows.size() < 2) {
    throw ArgumentError("importance ranking needs at least 2 sampled rows");
  }

  const auto target = dataset.target();
  double mean = 0.0;
  for (auto r : rows) mean += target[r];
  mean /= static_cast<double>(rows.size());
  double total = 0.0;
  for (auto r : rows) total += (target[r] - mean) * (target[r] - mean);

  std::vector<double> sum;
  std::vector<std::size_t> count;
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    const std::size_t p = parameters[i];
    const auto column = dataset.level_column(p);
    sum.assign(dataset.parameter(p).level_count(), 0.0);
    count.assign(sum.size(), 0);
    for (auto r : rows) {
      sum[column[r]] += target[r];
      ++count[column[r]];
    }
    const auto present = std::count_if(count.begin(), count.end(),
                                       [](std::size_t c) { return c > 0; });
    if (present < 2) {
      out.warnings.push_back("parameter '" + dataset.parameter(p).name +
                             "' has a single level in the sample; score 0");
      continue;
    }
    if (!(total > 0.0)) continue;
    double between = 0.0;
    for (std::size_t l = 0; l < sum.size(); ++l) {
      if (count[l] == 0) continue;
      const double m = sum[l] / static_cast<double>(count[l]);
      between += static_cast<double>(count[l]) * (m - mean) * (m - mean);
    }
    out.scores[i] = std::clamp(between / total, 0.0, 1.0);
  }

  std::vector<std::size_t> order(parameters.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.scores[a] > out.scores[b];
  });
  for (auto i : order) out.ranking.push_back(parameters[i]);
  return out;
}

std::vector<std::size_t> all_parameters(const Dataset& dataset) {
  std::vector<std::size_t> params(dataset.parameter_count());
  std::iota(params.begin(), params.end(), std::size_t{0});
  return params;
}

}  // namespace

ImportanceScores rank_parameters(const Dataset& dataset,
                                 const std::vector<std::size_t>& parameters,
                                 double sample_fraction, std::uint64_t seed) {
  for (auto p : parameters) {
    if (p >= dataset.parameter_count()) {
      throw SchemaError("importance ranking references an unknown parameter");
    }
  }
  const RowMask sample = draw_sample(dataset, sample_fraction, seed);
  return score_rows(dataset, parameters, sample.rows());
}

ImportanceScores rank_parameters(const Dataset& dataset, double sample_fraction,
                                 std::uint64_t seed) {
  return rank_parameters(dataset, all_parameters(dataset), sample_fraction, seed);
}

ImportanceReport recovery_experiment(const Dataset& dataset,
                                     const std::vector<double>& fractions,
                                     std::size_t repeats, std::uint64_t seed) {
  if (repeats < 1) throw ArgumentError("repeats must be at least 1");
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw ArgumentError("recovery fractions must lie in (0, 1]");
    }
  }
  ImportanceReport report;
  report.repeats = repeats;
  report.seed = seed;
  report.ground_truth = rank_parameters(dataset, 1.0, seed);
  const auto& truth = report.ground_truth.ranking;
  const std::size_t depth = std::min(kRecoveryDepth, truth.size());

  for (double fraction : fractions) {
    std::vector<std::size_t> hits(depth, 0);
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto scores = rank_parameters(dataset, fraction, seed + r);
      for (std::size_t k = 0; k < depth; ++k) {
        if (scores.ranking[k] == truth[k]) ++hits[k];
      }
    }
    RecoveryPoint point;
    point.fraction = fraction;
    for (auto h : hits) {
      point.top_k.push_back(static_cast<double>(h) /
                            static_cast<double>(repeats));
    }
    report.recovery.push_back(std::move(point));
  }
  return report;
}

std::vector<PipelineRound> incremental_pipeline(const Dataset& dataset,
                                                std::size_t batch_size,
                                                std::size_t rounds,
                                                std::uint64_t seed,
                                                double sample_fraction) {
  if (batch_size < 1) throw ArgumentError("batch_size must be at least 1");
  const RowMask sample = draw_sample(dataset, sample_fraction, seed);
  const auto rows = sample.rows();
  std::vector<PipelineRound> out;
  for (std::size_t round = 1; round <= rounds; ++round) {
    const std::size_t explored_count =
        std::min(dataset.parameter_count(), round * batch_size);
    PipelineRound r;
    r.round = round;
    r.explored.resize(explored_count);
    std::iota(r.explored.begin(), r.explored.end(), std::size_t{0});
    r.scores = score_rows(dataset, r.explored, rows);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace ice
