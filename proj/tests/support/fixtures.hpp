#pragma once

#include <string>
#include <vector>

#include "ice/filter.hpp"
#include "ice/provenance.hpp"
#include "ice/synthetic.hpp"

namespace fixture {

/// Storage-benchmark shaped synthetic sweep.
inline ice::SyntheticSpec storage_spec(std::size_t rows, double noise_sd = 25.0) {
  ice::SyntheticSpec spec;
  spec.parameters = {
      {"Workload", {"dbsrvr", "filesrvr", "mailsrvr", "websrvr"}, false},
      {"FileSystem", {"ext2", "ext3", "ext4", "xfs", "btrfs"}, false},
      {"BlockSize", {"1024", "2048", "4096"}, true},
      {"InodeSize", {"128", "256", "512"}, true},
      {"IOScheduler", {"noop", "deadline", "cfq"}, false},
      {"Device", {"hdd", "ssd"}, false}};
  spec.level_effects = {{120, 40, -30, 10},
                        {-20, 0, 15, 35, 5},
                        {0, 10, 25},
                        {0, 4, 8},
                        {6, 0, -6},
                        {0, 90}};
  spec.rows = rows;
  spec.repeat_runs = 5;
  spec.noise_sd = noise_sd;
  spec.base = 400;
  return spec;
}

/// The walkthrough chain: each step narrows the previous filter.
inline const std::vector<std::string>& walkthrough_steps() {
  static const std::vector<std::string> steps = {
      "Workload=dbsrvr", "FileSystem=xfs,ext4", "BlockSize=4096,2048", "Device=ssd"};
  return steps;
}

/// Builds the 5-stage log (stage 1 plus the four walkthrough steps) over the
/// given sample.
inline ice::ProvenanceLog walkthrough_log(const ice::Dataset& ds, const ice::RowMask& sample) {
  auto filter = ice::FilterState::unconstrained(ds);
  ice::ProvenanceLog log(filter, ice::aggregate_summary(ds, filter, sample).stats);
  for (const auto& step : walkthrough_steps()) {
    auto next = ice::apply_filter_expression(ds, filter, step);
    log.push(ice::describe_change(ds, filter, next), next,
             ice::aggregate_summary(ds, next, sample).stats);
    filter = next;
  }
  return log;
}

}  // namespace fixture
