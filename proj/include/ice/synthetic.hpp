#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "ice/dataset.hpp"

namespace ice {

/// Recipe for a measured-sweep stand-in: target = base + sum of per-level
/// planted effects + Gaussian noise, each configuration repeated
/// repeat_runs times.
struct SyntheticSpec {
  std::vector<ParameterSchema> parameters;
  std::vector<std::vector<double>> level_effects;  // [parameter][level]
  std::size_t rows = 0;
  double base = 0.0;
  double noise_sd = 0.0;
  std::size_t repeat_runs = 1;
  std::string target_name = "throughput";

  /// Throws ArgumentError/DataError on an inconsistent spec.
  void validate() const;

  /// Level effects on a linear ramp: level l of parameter p gets
  /// magnitudes[p] * l / (levels - 1).
  static std::vector<std::vector<double>> ramp_effects(
      const std::vector<ParameterSchema>& parameters,
      const std::vector<double>& magnitudes);
};

/// What the generator knows for certain about its output.
struct GroundTruth {
  /// Generated configuration with the largest planted mean; ties go to the
  /// first in enumeration order (parameters and levels in schema order).
  std::vector<LevelCode> best_configuration;
  double best_value = 0.0;  // base + planted effects of best_configuration
  /// Between-group variance fraction of the noiseless target per parameter.
  std::vector<double> importance;
  std::vector<std::size_t> importance_ranking;  // descending, ties by schema
};

struct SyntheticResult {
  Dataset dataset;
  GroundTruth truth;
  std::vector<std::string> warnings;
};

/// Deterministic given (spec, seed). When rows / repeat_runs covers the full
/// cross-product the configurations cycle through it in enumeration order;
/// otherwise each configuration draws every level uniformly.
SyntheticResult generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Parses the key/value spec document:
///
///   target = throughput
///   rows = 100000
///   repeat_runs = 5
///   noise_sd = 2.5
///   base = 100
///   param.Workload.levels = dbsrvr, filesrvr, mailsrvr, websrvr
///   param.Workload.effects = 8, 0, -2, 3
///   param.BlockSize.levels = 1024, 2048, 4096
///   param.BlockSize.magnitude = 4
///   param.BlockSize.ordinal = true
///
/// '#' starts a comment. Parameters keep first-mention order; a parameter
/// without effects or magnitude has zero effects.
SyntheticSpec parse_synthetic_spec(std::istream& in);

/// Decodes configuration index c of the cross-product, first parameter most
/// significant.
std::vector<LevelCode> decode_configuration(
    const std::vector<ParameterSchema>& parameters, std::size_t index);

}  // namespace ice
