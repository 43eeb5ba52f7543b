#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ice {

/// Default percentile cut points of an R-D bar.
inline const std::vector<double> kDefaultCuts = {5.0, 25.0, 50.0, 75.0, 95.0};
inline constexpr std::size_t kDefaultGridPoints = 64;

/// Order statistics of a multiset of target values. When count == 0 the
/// summary is unavailable: min/max/mean are meaningless and percentiles is
/// empty.
struct StatSummary {
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::vector<double> cuts;
  std::vector<double> percentiles;  // parallel to cuts

  bool available() const noexcept { return count > 0; }
  double range() const noexcept { return max - min; }
  bool operator==(const StatSummary&) const = default;
};

/// Half-violin payload: density sampled on an even grid spanning [min, max].
/// A constant sample is a spike: one position, density 1, bandwidth 0.
struct DensityCurve {
  std::vector<double> positions;
  std::vector<double> densities;
  double bandwidth = 0.0;

  bool is_spike() const noexcept { return positions.size() == 1; }
  bool operator==(const DensityCurve&) const = default;
};

struct KSResult {
  double statistic = 0.0;  // D
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;

  bool operator==(const KSResult&) const = default;
};

/// Throws ArgumentError unless cuts are strictly increasing within (0, 100).
void validate_cuts(std::span<const double> cuts);

/// Nearest-rank percentile of sorted data: the value at 1-based index
/// ceil(q/100 * n), clamped to [1, n]. sorted must be non-empty.
double nearest_rank(std::span<const double> sorted, double q);

/// Count, min, max, arithmetic mean and nearest-rank percentiles.
StatSummary summarize(std::span<const double> values,
                      std::span<const double> cuts = kDefaultCuts);

/// Same, for values the caller already sorted ascending.
StatSummary summarize_sorted(std::span<const double> sorted,
                             std::span<const double> cuts = kDefaultCuts);

/// Silverman's rule: 0.9 * min(sd, IQR/1.34) * n^(-1/5), falling back to sd
/// when the IQR is zero. Returns 0 for constant or single-value input.
double silverman_bandwidth(std::span<const double> sorted);

/// Gaussian kernel density estimate on grid_points evenly spaced positions
/// over [min, max]. Densities are rescaled so the trapezoidal integral over
/// the grid is 1 (the density of the data restricted to its observed range).
/// Empty input yields an empty curve.
DensityCurve kde_density(std::span<const double> values,
                         std::size_t grid_points = kDefaultGridPoints);
DensityCurve kde_density_sorted(std::span<const double> sorted,
                                std::size_t grid_points = kDefaultGridPoints);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
/// Throws ArgumentError if either sample is empty.
KSResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Kolmogorov survival function Q(lambda) = 2 sum_{k>=1} (-1)^{k-1}
/// exp(-2 k^2 lambda^2), truncated once terms drop below 1e-10.
double kolmogorov_q(double lambda);

}  // namespace ice
