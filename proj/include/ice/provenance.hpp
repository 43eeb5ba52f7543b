#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ice/dataset.hpp"
#include "ice/filter.hpp"
#include "ice/stats.hpp"

namespace ice {

/// One stage of the provenance chain. min/max are the target range reachable
/// under the stage's filter, stored at push time and never recomputed.
struct ProvenanceEntry {
  std::size_t stage = 0;  // 1-based
  std::string label;
  FilterState filter;
  std::size_t matched_rows = 0;
  std::optional<double> min;
  std::optional<double> max;
  std::optional<std::size_t> replicated_from;

  bool empty_selection() const noexcept { return !min.has_value(); }
  bool operator==(const ProvenanceEntry&) const = default;
};

/// Append-only chain of filter snapshots. Stage 1 is the unconstrained
/// filter; rollback replicates an earlier stage at the end of the chain.
class ProvenanceLog {
 public:
  ProvenanceLog() = default;
  ProvenanceLog(FilterState initial, const StatSummary& selection,
                std::string label = "All data");

  /// Rebuilds a log from serialized entries; throws ArgumentError if the
  /// stage numbering or replication references are inconsistent.
  static ProvenanceLog from_entries(std::vector<ProvenanceEntry> entries);

  const ProvenanceEntry& push(std::string label, FilterState filter,
                              const StatSummary& selection);

  /// Appends a copy of stage k (1-based) and returns it. The copy's filter
  /// becomes the active one. Throws ArgumentError when k is out of range.
  const ProvenanceEntry& rollback(std::size_t k);

  std::size_t size() const noexcept { return entries_.size(); }
  const ProvenanceEntry& stage(std::size_t k) const;
  const ProvenanceEntry& back() const { return entries_.back(); }
  const std::vector<ProvenanceEntry>& entries() const noexcept {
    return entries_;
  }

  bool operator==(const ProvenanceLog&) const = default;

 private:
  std::vector<ProvenanceEntry> entries_;
};

/// "Parameter:Level" style description of what changed between two filters,
/// e.g. "Workload:dbsrvr" or "FileSystem:ext2|ext4 & InodeSize:off".
std::string describe_change(const Dataset& dataset, const FilterState& before,
                            const FilterState& after);

}  // namespace ice
