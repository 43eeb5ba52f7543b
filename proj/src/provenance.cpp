#include "ice/provenance.hpp"

#include "ice/error.hpp"

namespace ice {

namespace {

ProvenanceEntry make_entry(std::size_t stage, std::string label,
                           FilterState filter, const StatSummary& selection) {
  ProvenanceEntry e;
  e.stage = stage;
  e.label = std::move(label);
  e.filter = std::move(filter);
  e.matched_rows = selection.count;
  if (selection.available()) {
    e.min = selection.min;
    e.max = selection.max;
  }
  return e;
}

}  // namespace

ProvenanceLog::ProvenanceLog(FilterState initial, const StatSummary& selection,
                             std::string label) {
  entries_.push_back(
      make_entry(1, std::move(label), std::move(initial), selection));
}

ProvenanceLog ProvenanceLog::from_entries(std::vector<ProvenanceEntry> entries) {
  if (entries.empty()) throw ArgumentError("provenance log needs stage 1");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.stage != i + 1) {
      throw ArgumentError("provenance stages must be consecutive from 1");
    }
    if (e.min.has_value() != e.max.has_value() ||
        (e.min && *e.min > *e.max)) {
      throw ArgumentError("provenance stage " + std::to_string(e.stage) +
                          " has an invalid range");
    }
    if (e.replicated_from && (*e.replicated_from < 1 || *e.replicated_from > i)) {
      throw ArgumentError("provenance stage " + std::to_string(e.stage) +
                          " replicates a stage that does not precede it");
    }
  }
  ProvenanceLog log;
  log.entries_ = std::move(entries);
  return log;
}

const ProvenanceEntry& ProvenanceLog::push(std::string label,
                                           FilterState filter,
                                           const StatSummary& selection) {
  entries_.push_back(make_entry(entries_.size() + 1, std::move(label),
                                std::move(filter), selection));
  return entries_.back();
}

const ProvenanceEntry& ProvenanceLog::rollback(std::size_t k) {
  if (k < 1 || k > entries_.size()) {
    throw ArgumentError("rollback stage " + std::to_string(k) +
                        " is outside 1.." + std::to_string(entries_.size()));
  }
  ProvenanceEntry copy = entries_[k - 1];
  copy.stage = entries_.size() + 1;
  copy.label = "rollback to stage " + std::to_string(k) + " (" +
               entries_[k - 1].label + ")";
  copy.replicated_from = k;
  entries_.push_back(std::move(copy));
  return entries_.back();
}

const ProvenanceEntry& ProvenanceLog::stage(std::size_t k) const {
  if (k < 1 || k > entries_.size()) {
    throw ArgumentError("stage " + std::to_string(k) + " does not exist");
  }
  return entries_[k - 1];
}

std::string describe_change(const Dataset& dataset, const FilterState& before,
                            const FilterState& after) {
  std::string out;
  auto append = [&](const std::string& part) {
    if (!out.empty()) out += " & ";
    out += part;
  };
  for (std::size_t p = 0; p < dataset.parameter_count(); ++p) {
    const auto& param = dataset.parameter(p);
    if (before.enabled(p) != after.enabled(p)) {
      append(param.name + (after.enabled(p) ? ":on" : ":off"));
    }
    if (before.selection_bits(p) == after.selection_bits(p)) continue;
    std::string levels;
    for (auto l : after.selected_levels(p)) {
      if (!levels.empty()) levels += '|';
      levels += param.levels[l];
    }
    append(param.name + ":" + (levels.empty() ? std::string("none") : levels));
  }
  return out.empty() ? std::string("no change") : out;
}

}  // namespace ice
