#include "ice/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ice/error.hpp"

namespace ice {

namespace {

// Neumaier-compensated sum.
double accurate_sum(std::span<const double> values) {
  double sum = 0.0;
  double compensation = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      compensation += (sum - t) + v;
    } else {
      compensation += (v - t) + sum;
    }
    sum = t;
  }
  return sum + compensation;
}

// Kernel contributions beyond this many bandwidths are below 3e-18 of the
// peak and are skipped.
constexpr double kKernelCutoff = 9.0;

}  // namespace

void validate_cuts(std::span<const double> cuts) {
  double previous = 0.0;
  for (double q : cuts) {
    if (!(q > 0.0 && q < 100.0)) {
      throw ArgumentError("percentile cuts must lie strictly inside (0, 100)");
    }
    if (q <= previous) {
      throw ArgumentError("percentile cuts must be strictly increasing");
    }
    previous = q;
  }
}

double nearest_rank(std::span<const double> sorted, double q) {
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

StatSummary summarize_sorted(std::span<const double> sorted,
                             std::span<const double> cuts) {
  validate_cuts(cuts);
  StatSummary s;
  s.cuts.assign(cuts.begin(), cuts.end());
  s.count = sorted.size();
  if (sorted.empty()) return s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.mean = std::clamp(accurate_sum(sorted) / static_cast<double>(sorted.size()),
                      s.min, s.max);
  s.percentiles.reserve(cuts.size());
  for (double q : cuts) s.percentiles.push_back(nearest_rank(sorted, q));
  return s;
}

StatSummary summarize(std::span<const double> values,
                      std::span<const double> cuts) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return summarize_sorted(sorted, cuts);
}

double silverman_bandwidth(std::span<const double> sorted) {
  const std::size_t n = sorted.size();
  if (n < 2 || sorted.front() == sorted.back()) return 0.0;
  const double mean = accurate_sum(sorted) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double iqr = nearest_rank(sorted, 75.0) - nearest_rank(sorted, 25.0);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

DensityCurve kde_density_sorted(std::span<const double> sorted,
                                std::size_t grid_points) {
  if (grid_points < 2) throw ArgumentError("grid_points must be at least 2");
  DensityCurve curve;
  if (sorted.empty()) return curve;
  const double lo = sorted.front();
  const double hi = sorted.back();
  if (lo == hi || sorted.size() < 2) {
    curve.positions = {lo};
    curve.densities = {1.0};
    curve.bandwidth = 0.0;
    return curve;
  }

  const double h = silverman_bandwidth(sorted);
  curve.bandwidth = h;
  curve.positions.resize(grid_points);
  curve.densities.resize(grid_points);
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  const double norm = 1.0 / (static_cast<double>(sorted.size()) * h *
                             std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x =
        i + 1 == grid_points ? hi : lo + step * static_cast<double>(i);
    curve.positions[i] = x;
    const auto first = std::lower_bound(sorted.begin(), sorted.end(),
                                        x - kKernelCutoff * h);
    const auto last =
        std::upper_bound(first, sorted.end(), x + kKernelCutoff * h);
    double sum = 0.0;
    for (auto it = first; it != last; ++it) {
      const double u = (x - *it) / h;
      sum += std::exp(-0.5 * u * u);
    }
    curve.densities[i] = sum * norm;
  }

  double integral = 0.0;
  for (std::size_t i = 1; i < grid_points; ++i) {
    integral += 0.5 * (curve.densities[i] + curve.densities[i - 1]) *
                (curve.positions[i] - curve.positions[i - 1]);
  }
  if (integral > 0.0) {
    for (double& d : curve.densities) d /= integral;
  }
  return curve;
}

DensityCurve kde_density(std::span<const double> values,
                         std::size_t grid_points) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return kde_density_sorted(sorted, grid_points);
}

double kolmogorov_q(double lambda) {
  // Below 0.1 the complementary CDF differs from 1 by less than 1e-50.
  if (!(lambda >= 0.1)) return 1.0;
  constexpr double kTolerance = 1e-10;
  double sum = 0.0;
  double sign = 1.0;
  const double factor = -2.0 * lambda * lambda;
  for (int k = 1; k < 100000; ++k) {
    const double term = std::exp(factor * k * k);
    sum += sign * term;
    if (term < kTolerance) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KSResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw ArgumentError("Kolmogorov-Smirnov test needs two non-empty samples");
  }
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const auto n1 = static_cast<double>(sa.size());
  const auto n2 = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 -
                             static_cast<double>(j) / n2));
  }

  KSResult result;
  result.statistic = d;
  result.n1 = sa.size();
  result.n2 = sb.size();
  if (d == 0.0) {
    result.p_value = 1.0;
  } else {
    const double ne = n1 * n2 / (n1 + n2);
    const double root = std::sqrt(ne);
    result.p_value = kolmogorov_q((root + 0.12 + 0.11 / root) * d);
  }
  return result;
}

}  // namespace ice
