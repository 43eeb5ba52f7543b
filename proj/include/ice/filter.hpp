#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ice/dataset.hpp"
#include "ice/row_mask.hpp"
#include "ice/stats.hpp"

namespace ice {

/// The analyst's configuration constraint: per parameter an enable flag and
/// a set of selected levels (bit l = level l).
class FilterState {
 public:
  FilterState() = default;
  /// Every parameter enabled with all levels selected.
  explicit FilterState(std::span<const ParameterSchema> parameters);
  static FilterState unconstrained(const Dataset& dataset) {
    return FilterState(dataset.parameters());
  }

  std::size_t parameter_count() const noexcept { return entries_.size(); }
  std::size_t level_count(std::size_t p) const { return entries_.at(p).levels; }

  bool enabled(std::size_t p) const { return entries_.at(p).enabled; }
  void set_enabled(std::size_t p, bool on) { entries_.at(p).enabled = on; }

  bool selected(std::size_t p, std::size_t level) const;
  void set_selected(std::size_t p, std::size_t level, bool on);
  void toggle_level(std::size_t p, std::size_t level);
  void select_only(std::size_t p, std::size_t level);
  void select_all(std::size_t p);

  std::uint64_t selection_bits(std::size_t p) const {
    return entries_.at(p).selected;
  }
  void set_selection_bits(std::size_t p, std::uint64_t bits);
  std::vector<std::size_t> selected_levels(std::size_t p) const;
  std::size_t selected_count(std::size_t p) const;

  /// True when every row admitted by *this is also admitted by other, judged
  /// on the constraint structure alone.
  bool restricts(const FilterState& other) const;

  /// Throws SchemaError unless the shape matches the dataset schema.
  void validate(const Dataset& dataset) const;

  bool operator==(const FilterState&) const = default;

 private:
  struct Entry {
    bool enabled = true;
    std::uint64_t selected = 0;
    std::size_t levels = 0;
    bool operator==(const Entry&) const = default;
  };
  std::uint64_t full_bits(std::size_t p) const;

  std::vector<Entry> entries_;
};

/// Applies clauses "param=level[,level...]" (also "param=*", and "param=" for
/// an empty selection) and "!param", separated by ';', on top of base. A
/// level clause enables the parameter and replaces its selection. Throws
/// SchemaError/ArgumentError.
FilterState apply_filter_expression(const Dataset& dataset, FilterState base,
                                    std::string_view expression);
inline FilterState parse_filter_expression(const Dataset& dataset,
                                           std::string_view expression) {
  return apply_filter_expression(dataset, FilterState::unconstrained(dataset),
                                 expression);
}

/// Inverse of parse_filter_expression for the constrained parameters.
std::string to_filter_expression(const Dataset& dataset,
                                 const FilterState& filter);

/// AND over enabled parameters of the OR of their selected level masks.
RowMask selection_mask(const Dataset& dataset, const FilterState& filter);

struct SummaryOptions {
  std::vector<double> cuts = kDefaultCuts;
  std::size_t grid_points = kDefaultGridPoints;
};

/// One R-D bar.
struct RDSummary {
  std::string parameter;
  std::string level;
  std::size_t parameter_index = 0;
  std::size_t level_index = 0;
  bool parameter_enabled = true;
  bool selected = true;
  StatSummary stats;
  std::optional<DensityCurve> density;  // present iff available()

  bool available() const noexcept { return stats.available(); }
  bool operator==(const RDSummary&) const = default;
};

struct AggregateSummary {
  std::size_t matched_rows = 0;
  StatSummary stats;
  std::optional<DensityCurve> density;

  bool available() const noexcept { return stats.available(); }
  bool operator==(const AggregateSummary&) const = default;
};

/// Bars for every (parameter, level), grouped by parameter in schema order.
/// Level l of parameter p covers sample & C_p & mask(p, l), where C_p is the
/// selection with p's own constraint removed.
std::vector<RDSummary> explorer_summaries(const Dataset& dataset,
                                          const FilterState& filter,
                                          const RowMask& sample,
                                          const SummaryOptions& options = {});

/// Summary over sample & selection_mask(filter).
AggregateSummary aggregate_summary(const Dataset& dataset,
                                   const FilterState& filter,
                                   const RowMask& sample,
                                   const SummaryOptions& options = {});

}  // namespace ice
