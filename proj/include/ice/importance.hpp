#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ice/dataset.hpp"

namespace ice {

/// One-way variance decomposition of the target per parameter: the share of
/// the total sum of squares explained by grouping on that parameter alone
/// (a depth-1 regression tree split on every level).
struct ImportanceScores {
  std::vector<std::size_t> parameters;  // dataset indices that were scored
  std::vector<double> scores;           // aligned with parameters, in [0, 1]
  std::vector<std::size_t> ranking;     // dataset indices, best first
  std::size_t sample_rows = 0;
  std::vector<std::string> warnings;

  bool operator==(const ImportanceScores&) const = default;
};

/// Scores every parameter on a uniform row sample. Throws ArgumentError when
/// the sample has fewer than 2 rows or the fraction is outside (0, 1].
ImportanceScores rank_parameters(const Dataset& dataset, double sample_fraction,
                                 std::uint64_t seed);
/// Scores only the given parameters (dataset indices).
ImportanceScores rank_parameters(const Dataset& dataset,
                                 const std::vector<std::size_t>& parameters,
                                 double sample_fraction, std::uint64_t seed);

struct RecoveryPoint {
  double fraction = 0.0;
  /// top_k[k] is the share of repeats whose (k+1)-th ranked parameter equals
  /// the full-data (k+1)-th ranked parameter. Length min(3, parameters).
  std::vector<double> top_k;

  bool operator==(const RecoveryPoint&) const = default;
};

struct ImportanceReport {
  ImportanceScores ground_truth;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
  std::vector<RecoveryPoint> recovery;

  bool operator==(const ImportanceReport&) const = default;
};

inline constexpr std::size_t kRecoveryDepth = 3;

/// Repeats rank_parameters on independent samples (seed + repeat index) per
/// fraction and reports how often the top-ranked parameters agree with the
/// full-data ranking.
ImportanceReport recovery_experiment(const Dataset& dataset,
                                     const std::vector<double>& fractions,
                                     std::size_t repeats, std::uint64_t seed);

struct PipelineRound {
  std::size_t round = 0;  // 1-based
  std::vector<std::size_t> explored;
  ImportanceScores scores;

  bool operator==(const PipelineRound&) const = default;
};

/// Explores parameters in schema order batch_size at a time, re-ranking the
/// explored union on the same small sample every round.
std::vector<PipelineRound> incremental_pipeline(const Dataset& dataset,
                                                std::size_t batch_size,
                                                std::size_t rounds,
                                                std::uint64_t seed,
                                                double sample_fraction = 0.05);

}  // namespace ice
