#include "ice/filter.hpp"

#include <algorithm>
#include <bit>

#include "ice/error.hpp"
#include "text.hpp"

namespace ice {

FilterState::FilterState(std::span<const ParameterSchema> parameters) {
  entries_.reserve(parameters.size());
  for (const auto& p : parameters) {
    Entry e;
    e.levels = p.level_count();
    e.selected = e.levels >= 64 ? ~std::uint64_t{0}
                                : (std::uint64_t{1} << e.levels) - 1;
    entries_.push_back(e);
  }
}

std::uint64_t FilterState::full_bits(std::size_t p) const {
  const std::size_t levels = entries_.at(p).levels;
  return levels >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << levels) - 1;
}

bool FilterState::selected(std::size_t p, std::size_t level) const {
  if (level >= level_count(p)) throw SchemaError("level index out of range");
  return (entries_[p].selected >> level) & 1u;
}

void FilterState::set_selected(std::size_t p, std::size_t level, bool on) {
  if (level >= level_count(p)) throw SchemaError("level index out of range");
  const auto bit = std::uint64_t{1} << level;
  if (on) {
    entries_[p].selected |= bit;
  } else {
    entries_[p].selected &= ~bit;
  }
}

void FilterState::toggle_level(std::size_t p, std::size_t level) {
  set_selected(p, level, !selected(p, level));
}

void FilterState::select_only(std::size_t p, std::size_t level) {
  if (level >= level_count(p)) throw SchemaError("level index out of range");
  entries_[p].selected = std::uint64_t{1} << level;
}

void FilterState::select_all(std::size_t p) { entries_.at(p).selected = full_bits(p); }

void FilterState::set_selection_bits(std::size_t p, std::uint64_t bits) {
  if ((bits & ~full_bits(p)) != 0) {
    throw SchemaError("selection references a level outside the schema");
  }
  entries_.at(p).selected = bits;
}

std::vector<std::size_t> FilterState::selected_levels(std::size_t p) const {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < level_count(p); ++l) {
    if ((entries_[p].selected >> l) & 1u) out.push_back(l);
  }
  return out;
}

std::size_t FilterState::selected_count(std::size_t p) const {
  return static_cast<std::size_t>(std::popcount(entries_.at(p).selected));
}

bool FilterState::restricts(const FilterState& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t p = 0; p < entries_.size(); ++p) {
    const Entry& mine = entries_[p];
    const Entry& theirs = other.entries_[p];
    if (!theirs.enabled) continue;
    if (!mine.enabled) return false;
    if ((mine.selected & ~theirs.selected) != 0) return false;
  }
  return true;
}

void FilterState::validate(const Dataset& dataset) const {
  if (entries_.size() != dataset.parameter_count()) {
    throw SchemaError("filter has " + std::to_string(entries_.size()) +
                      " parameters, dataset has " +
                      std::to_string(dataset.parameter_count()));
  }
  for (std::size_t p = 0; p < entries_.size(); ++p) {
    if (entries_[p].levels != dataset.parameter(p).level_count()) {
      throw SchemaError("filter level count mismatch for parameter '" +
                        dataset.parameter(p).name + "'");
    }
    if ((entries_[p].selected & ~full_bits(p)) != 0) {
      throw SchemaError("filter selects an unknown level of parameter '" +
                        dataset.parameter(p).name + "'");
    }
  }
}

FilterState apply_filter_expression(const Dataset& dataset, FilterState base,
                                    std::string_view expression) {
  base.validate(dataset);
  for (const auto& raw : text::split(expression, ';')) {
    const auto clause = text::trim(raw);
    if (clause.empty()) continue;
    if (clause.front() == '!') {
      const auto name = text::trim(clause.substr(1));
      base.set_enabled(dataset.parameter_index(name), false);
      continue;
    }
    const auto eq = clause.find('=');
    if (eq == std::string_view::npos) {
      throw ArgumentError("filter clause '" + std::string(clause) +
                          "' is neither 'param=levels' nor '!param'");
    }
    const std::size_t p = dataset.parameter_index(text::trim(clause.substr(0, eq)));
    const auto rhs = text::trim(clause.substr(eq + 1));
    base.set_enabled(p, true);
    if (rhs == "*") {
      base.select_all(p);
      continue;
    }
    std::uint64_t bits = 0;
    if (rhs.empty()) {
      base.set_selection_bits(p, bits);
      continue;
    }
    for (const auto& level : text::split(rhs, ',')) {
      const auto name = text::trim(level);
      if (name.empty()) {
        throw ArgumentError("empty level name in filter clause '" +
                            std::string(clause) + "'");
      }
      bits |= std::uint64_t{1} << dataset.level_index(p, name);
    }
    base.set_selection_bits(p, bits);
  }
  return base;
}

std::string to_filter_expression(const Dataset& dataset,
                                 const FilterState& filter) {
  std::string out;
  auto append = [&](const std::string& clause) {
    if (!out.empty()) out += ';';
    out += clause;
  };
  for (std::size_t p = 0; p < filter.parameter_count(); ++p) {
    const auto& param = dataset.parameter(p);
    if (!filter.enabled(p)) {
      append("!" + param.name);
      continue;
    }
    if (filter.selected_count(p) == param.level_count()) continue;
    std::string clause = param.name + "=";
    bool first = true;
    for (auto l : filter.selected_levels(p)) {
      if (!first) clause += ',';
      clause += param.levels[l];
      first = false;
    }
    append(clause);
  }
  return out;
}

namespace {

// OR of the selected level masks, or all rows when the parameter imposes no
// constraint (disabled, or every level selected).
RowMask parameter_constraint(const Dataset& dataset, const FilterState& filter,
                             std::size_t p) {
  const std::size_t n = dataset.row_count();
  if (!filter.enabled(p) ||
      filter.selected_count(p) == dataset.parameter(p).level_count()) {
    return RowMask::all(n);
  }
  RowMask out(n);
  for (auto l : filter.selected_levels(p)) out |= dataset.level_mask(p, l);
  return out;
}

std::vector<double> sorted_values(const Dataset& dataset, const RowMask& rows) {
  const auto target = dataset.target();
  std::vector<double> values;
  values.reserve(rows.count());
  rows.for_each([&](std::size_t r) { values.push_back(target[r]); });
  std::sort(values.begin(), values.end());
  return values;
}

void require_sample_shape(const Dataset& dataset, const RowMask& sample) {
  if (sample.size() != dataset.row_count()) {
    throw ArgumentError("sample mask length does not match the dataset");
  }
}

}  // namespace

RowMask selection_mask(const Dataset& dataset, const FilterState& filter) {
  filter.validate(dataset);
  RowMask out = RowMask::all(dataset.row_count());
  for (std::size_t p = 0; p < dataset.parameter_count(); ++p) {
    if (!filter.enabled(p)) continue;
    out &= parameter_constraint(dataset, filter, p);
  }
  return out;
}

std::vector<RDSummary> explorer_summaries(const Dataset& dataset,
                                          const FilterState& filter,
                                          const RowMask& sample,
                                          const SummaryOptions& options) {
  filter.validate(dataset);
  require_sample_shape(dataset, sample);
  validate_cuts(options.cuts);
  const std::size_t n = dataset.row_count();
  const std::size_t count = dataset.parameter_count();

  std::vector<RowMask> constraint;
  constraint.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    constraint.push_back(parameter_constraint(dataset, filter, p));
  }
  // prefix[p] = sample & constraints [0, p); suffix[p] = constraints [p, count).
  std::vector<RowMask> prefix(count + 1);
  std::vector<RowMask> suffix(count + 1);
  prefix[0] = sample;
  for (std::size_t p = 0; p < count; ++p) {
    prefix[p + 1] = prefix[p] & constraint[p];
  }
  suffix[count] = RowMask::all(n);
  for (std::size_t p = count; p-- > 0;) {
    suffix[p] = suffix[p + 1] & constraint[p];
  }

  std::vector<RDSummary> out;
  RowMask rows(n);
  for (std::size_t p = 0; p < count; ++p) {
    const auto& param = dataset.parameter(p);
    for (std::size_t l = 0; l < param.level_count(); ++l) {
      intersect_into(rows, prefix[p], suffix[p + 1], dataset.level_mask(p, l));
      const auto values = sorted_values(dataset, rows);
      RDSummary bar;
      bar.parameter = param.name;
      bar.level = param.levels[l];
      bar.parameter_index = p;
      bar.level_index = l;
      bar.parameter_enabled = filter.enabled(p);
      bar.selected = filter.selected(p, l);
      bar.stats = summarize_sorted(values, options.cuts);
      if (bar.stats.available()) {
        bar.density = kde_density_sorted(values, options.grid_points);
      }
      out.push_back(std::move(bar));
    }
  }
  return out;
}

AggregateSummary aggregate_summary(const Dataset& dataset,
                                   const FilterState& filter,
                                   const RowMask& sample,
                                   const SummaryOptions& options) {
  require_sample_shape(dataset, sample);
  const RowMask rows = selection_mask(dataset, filter) & sample;
  const auto values = sorted_values(dataset, rows);
  AggregateSummary agg;
  agg.matched_rows = values.size();
  agg.stats = summarize_sorted(values, options.cuts);
  if (agg.stats.available()) {
    agg.density = kde_density_sorted(values, options.grid_points);
  }
  return agg;
}

}  // namespace ice
