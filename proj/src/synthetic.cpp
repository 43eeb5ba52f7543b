#include "ice/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "ice/error.hpp"
#include "text.hpp"

namespace ice {

void SyntheticSpec::validate() const {
  validate_schema(parameters);
  if (level_effects.size() != parameters.size()) {
    throw ArgumentError("level_effects must have one entry per parameter");
  }
  for (std::size_t p = 0; p < parameters.size(); ++p) {
    if (level_effects[p].size() != parameters[p].level_count()) {
      throw ArgumentError("parameter '" + parameters[p].name +
                          "' needs one effect per level");
    }
    for (double e : level_effects[p]) {
      if (!std::isfinite(e)) {
        throw ArgumentError("planted effects must be finite");
      }
    }
  }
  if (!std::isfinite(base)) throw ArgumentError("base must be finite");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw ArgumentError("noise_sd must be finite and non-negative");
  }
  if (repeat_runs < 1) throw ArgumentError("repeat_runs must be at least 1");
  if (target_name.empty()) throw ArgumentError("target name is empty");
}

std::vector<std::vector<double>> SyntheticSpec::ramp_effects(
    const std::vector<ParameterSchema>& parameters,
    const std::vector<double>& magnitudes) {
  if (magnitudes.size() != parameters.size()) {
    throw ArgumentError("one magnitude per parameter is required");
  }
  std::vector<std::vector<double>> effects(parameters.size());
  for (std::size_t p = 0; p < parameters.size(); ++p) {
    const std::size_t levels = parameters[p].level_count();
    effects[p].resize(levels);
    for (std::size_t l = 0; l < levels; ++l) {
      effects[p][l] = levels > 1 ? magnitudes[p] * static_cast<double>(l) /
                                       static_cast<double>(levels - 1)
                                 : 0.0;
    }
  }
  return effects;
}

std::vector<LevelCode> decode_configuration(
    const std::vector<ParameterSchema>& parameters, std::size_t index) {
  std::vector<LevelCode> config(parameters.size());
  for (std::size_t p = parameters.size(); p-- > 0;) {
    const std::size_t levels = parameters[p].level_count();
    config[p] = static_cast<LevelCode>(index % levels);
    index /= levels;
  }
  return config;
}

namespace {

double planted_value(const SyntheticSpec& spec,
                     const std::vector<LevelCode>& config) {
  double value = spec.base;
  for (std::size_t p = 0; p < config.size(); ++p) {
    value += spec.level_effects[p][config[p]];
  }
  return value;
}

std::vector<double> between_group_fraction(
    const std::vector<std::vector<LevelCode>>& codes,
    const std::vector<double>& values,
    const std::vector<ParameterSchema>& parameters) {
  const std::size_t n = values.size();
  std::vector<double> scores(parameters.size(), 0.0);
  if (n == 0) return scores;
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double total = 0.0;
  for (double v : values) total += (v - mean) * (v - mean);
  if (!(total > 0.0)) return scores;
  for (std::size_t p = 0; p < parameters.size(); ++p) {
    std::vector<double> sum(parameters[p].level_count(), 0.0);
    std::vector<std::size_t> count(parameters[p].level_count(), 0);
    for (std::size_t r = 0; r < n; ++r) {
      sum[codes[p][r]] += values[r];
      ++count[codes[p][r]];
    }
    double between = 0.0;
    for (std::size_t l = 0; l < sum.size(); ++l) {
      if (count[l] == 0) continue;
      const double m = sum[l] / static_cast<double>(count[l]);
      between += static_cast<double>(count[l]) * (m - mean) * (m - mean);
    }
    scores[p] = std::clamp(between / total, 0.0, 1.0);
  }
  return scores;
}

}  // namespace

SyntheticResult generate_synthetic(const SyntheticSpec& spec,
                                   std::uint64_t seed) {
  spec.validate();
  SyntheticResult result;

  std::size_t rows = spec.rows;
  if (rows % spec.repeat_runs != 0) {
    rows -= rows % spec.repeat_runs;
    result.warnings.push_back(
        "rows (" + std::to_string(spec.rows) +
        ") is not divisible by repeat_runs (" +
        std::to_string(spec.repeat_runs) + "); generating " +
        std::to_string(rows) + " rows");
  }
  const std::size_t configs = rows / spec.repeat_runs;
  const std::size_t params = spec.parameters.size();

  std::size_t space = 1;
  bool factorial = true;
  for (const auto& p : spec.parameters) {
    if (space > configs / p.level_count()) {
      factorial = false;
      break;
    }
    space *= p.level_count();
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sd > 0 ? spec.noise_sd : 1.0);

  std::vector<std::vector<LevelCode>> codes(params, std::vector<LevelCode>(rows));
  std::vector<double> target(rows);
  std::vector<double> noiseless(rows);

  std::vector<LevelCode> best;
  double best_value = -INFINITY;

  std::vector<LevelCode> config(params);
  for (std::size_t c = 0; c < configs; ++c) {
    if (factorial) {
      config = decode_configuration(spec.parameters, c % space);
    } else {
      for (std::size_t p = 0; p < params; ++p) {
        std::uniform_int_distribution<std::size_t> pick(
            0, spec.parameters[p].level_count() - 1);
        config[p] = static_cast<LevelCode>(pick(rng));
      }
    }
    const double value = planted_value(spec, config);
    // Lexicographic comparison gives enumeration order among ties.
    if (value > best_value || (value == best_value && config < best)) {
      best_value = value;
      best = config;
    }
    for (std::size_t k = 0; k < spec.repeat_runs; ++k) {
      const std::size_t r = c * spec.repeat_runs + k;
      for (std::size_t p = 0; p < params; ++p) codes[p][r] = config[p];
      noiseless[r] = value;
      target[r] = spec.noise_sd > 0 ? value + noise(rng) : value;
    }
  }

  result.truth.best_configuration = best;
  result.truth.best_value = configs > 0 ? best_value : 0.0;
  result.truth.importance = between_group_fraction(codes, noiseless, spec.parameters);
  result.truth.importance_ranking.resize(params);
  std::iota(result.truth.importance_ranking.begin(),
            result.truth.importance_ranking.end(), std::size_t{0});
  std::stable_sort(result.truth.importance_ranking.begin(),
                   result.truth.importance_ranking.end(),
                   [&](std::size_t a, std::size_t b) {
                     return result.truth.importance[a] > result.truth.importance[b];
                   });

  result.dataset = Dataset::from_codes(spec.parameters, spec.target_name,
                                       std::move(target), std::move(codes));
  return result;
}

SyntheticSpec parse_synthetic_spec(std::istream& in) {
  SyntheticSpec spec;
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::string>> levels;
  std::map<std::string, std::vector<double>> effects;
  std::map<std::string, double> magnitudes;
  std::set<std::string> ordinal;

  auto touch = [&](const std::string& name) {
    if (std::find(order.begin(), order.end(), name) == order.end()) {
      order.push_back(name);
    }
  };
  auto parse_number = [](std::string_view value, const std::string& key) {
    const auto v = text::parse_double(value);
    if (!v) throw ArgumentError("'" + key + "' expects a number");
    return *v;
  };
  auto parse_count = [](std::string_view value, const std::string& key) {
    const auto v = text::parse_int<std::size_t>(value);
    if (!v) throw ArgumentError("'" + key + "' expects a non-negative integer");
    return *v;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = text::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw DataError("expected 'key = value' on spec line " +
                      std::to_string(line_no));
    }
    const std::string key(text::trim(view.substr(0, eq)));
    const auto value = text::trim(view.substr(eq + 1));

    if (key == "target") {
      spec.target_name = std::string(value);
    } else if (key == "rows") {
      spec.rows = parse_count(value, key);
    } else if (key == "repeat_runs") {
      spec.repeat_runs = parse_count(value, key);
    } else if (key == "noise_sd") {
      spec.noise_sd = parse_number(value, key);
    } else if (key == "base") {
      spec.base = parse_number(value, key);
    } else if (key.starts_with("param.")) {
      const auto dot = key.rfind('.');
      if (dot <= 6) throw DataError("malformed parameter key '" + key + "'");
      const std::string name = key.substr(6, dot - 6);
      const std::string field = key.substr(dot + 1);
      touch(name);
      if (field == "levels") {
        for (const auto& l : text::split(value, ',')) {
          levels[name].emplace_back(text::trim(l));
        }
      } else if (field == "effects") {
        for (const auto& e : text::split(value, ',')) {
          effects[name].push_back(parse_number(e, key));
        }
      } else if (field == "magnitude") {
        magnitudes[name] = parse_number(value, key);
      } else if (field == "ordinal") {
        if (value == "true") ordinal.insert(name);
      } else {
        throw DataError("unknown parameter field '" + field + "'");
      }
    } else {
      throw DataError("unknown spec key '" + key + "' on line " +
                      std::to_string(line_no));
    }
  }

  for (const auto& name : order) {
    ParameterSchema schema{name, levels[name], ordinal.contains(name)};
    std::vector<double> planted;
    if (effects.contains(name)) {
      planted = effects[name];
    } else if (magnitudes.contains(name)) {
      planted = SyntheticSpec::ramp_effects({schema}, {magnitudes[name]}).front();
    } else {
      planted.assign(schema.level_count(), 0.0);
    }
    spec.parameters.push_back(std::move(schema));
    spec.level_effects.push_back(std::move(planted));
  }
  spec.validate();
  return spec;
}

}  // namespace ice
