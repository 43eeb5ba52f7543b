#include "ice/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ice/error.hpp"

namespace ice {

std::string_view to_string(SampleReason reason) {
  switch (reason) {
    case SampleReason::full_small_dataset:
      return "full_small_dataset";
    case SampleReason::threshold_met:
      return "threshold_met";
    case SampleReason::ladder_exhausted:
      return "ladder_exhausted";
  }
  return "unknown";
}

SampleReason sample_reason_from_string(std::string_view name) {
  for (auto r : {SampleReason::full_small_dataset, SampleReason::threshold_met,
                 SampleReason::ladder_exhausted}) {
    if (to_string(r) == name) return r;
  }
  throw ArgumentError("unknown sample reason '" + std::string(name) + "'");
}

std::size_t sample_size(std::size_t n, double fraction) {
  const auto k = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(n)));
  return std::min(k, n);
}

RowMask draw_sample(const Dataset& dataset, double fraction,
                    std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ArgumentError("sample fraction must lie in (0, 1]");
  }
  const std::size_t n = dataset.row_count();
  const std::size_t k = sample_size(n, fraction);
  if (k == n) return RowMask::all(n);

  std::vector<std::uint32_t> population(n);
  std::iota(population.begin(), population.end(), 0u);
  std::vector<std::uint32_t> chosen;
  chosen.reserve(k);
  std::mt19937_64 rng(seed);
  std::sample(population.begin(), population.end(), std::back_inserter(chosen),
              k, rng);
  RowMask mask(n);
  for (auto r : chosen) mask.set(r);
  return mask;
}

std::vector<double> gather_target(const Dataset& dataset, const RowMask& mask) {
  const auto target = dataset.target();
  std::vector<double> out;
  out.reserve(mask.count());
  mask.for_each([&](std::size_t r) { out.push_back(target[r]); });
  return out;
}

SamplePlan choose_sample_size(const Dataset& dataset,
                              const std::vector<double>& ladder,
                              double threshold, std::uint64_t seed) {
  if (ladder.empty()) throw ArgumentError("sample ladder is empty");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0 && ladder[i] <= 1.0)) {
      throw ArgumentError("ladder fractions must lie in (0, 1]");
    }
    if (i > 0 && ladder[i] <= ladder[i - 1]) {
      throw ArgumentError("ladder fractions must be strictly increasing");
    }
  }

  const std::size_t n = dataset.row_count();
  SamplePlan plan;
  plan.seed = seed;
  if (n < kFullDatasetThreshold) {
    plan.fraction = 1.0;
    plan.row_subset = RowMask::all(n);
    plan.reason = SampleReason::full_small_dataset;
    return plan;
  }

  const auto full = dataset.target();
  for (double fraction : ladder) {
    RowMask subset = draw_sample(dataset, fraction, seed);
    const auto sampled = gather_target(dataset, subset);
    const KSResult ks = ks_two_sample(sampled, full);
    plan.trials.push_back({fraction, sampled.size(), ks});
    if (ks.p_value >= threshold) {
      plan.fraction = fraction;
      plan.row_subset = std::move(subset);
      plan.ks = ks;
      plan.reason = SampleReason::threshold_met;
      return plan;
    }
  }

  plan.fraction = 1.0;
  plan.row_subset = RowMask::all(n);
  plan.ks = ks_two_sample(full, full);
  plan.reason = SampleReason::ladder_exhausted;
  return plan;
}

}  // namespace ice
