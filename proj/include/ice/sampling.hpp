#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ice/dataset.hpp"
#include "ice/row_mask.hpp"
#include "ice/stats.hpp"

namespace ice {

/// Datasets below this many rows are explored without sampling.
inline constexpr std::size_t kFullDatasetThreshold = 20'000;
inline const std::vector<double> kDefaultLadder = {0.05, 0.10, 0.15,
                                                   0.20, 0.30, 0.50};
inline constexpr double kDefaultPValueThreshold = 0.5;

enum class SampleReason { full_small_dataset, threshold_met, ladder_exhausted };

std::string_view to_string(SampleReason reason);
SampleReason sample_reason_from_string(std::string_view name);

/// One rung of the ladder that was evaluated.
struct LadderTrial {
  double fraction = 0.0;
  std::size_t rows = 0;
  KSResult ks;

  bool operator==(const LadderTrial&) const = default;
};

struct SamplePlan {
  double fraction = 1.0;
  std::uint64_t seed = 0;
  RowMask row_subset;
  std::optional<KSResult> ks;  // absent when no test was run
  SampleReason reason = SampleReason::full_small_dataset;
  std::vector<LadderTrial> trials;

  bool operator==(const SamplePlan&) const = default;
};

/// Number of rows a fraction selects: round(fraction * n), capped to n.
std::size_t sample_size(std::size_t n, double fraction);

/// Uniform sample without replacement of sample_size(N, fraction) rows,
/// deterministic given seed. Throws ArgumentError unless 0 < fraction <= 1.
RowMask draw_sample(const Dataset& dataset, double fraction, std::uint64_t seed);

/// Target values of the rows set in mask, in row order.
std::vector<double> gather_target(const Dataset& dataset, const RowMask& mask);

/// Walks the ladder upwards and keeps the first fraction whose sample passes
/// the KS p-value threshold against the full target distribution.
SamplePlan choose_sample_size(const Dataset& dataset,
                              const std::vector<double>& ladder = kDefaultLadder,
                              double threshold = kDefaultPValueThreshold,
                              std::uint64_t seed = 0);

}  // namespace ice
