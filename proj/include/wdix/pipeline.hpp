#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "wdix/dataset.hpp"
#include "wdix/diagnostics.hpp"
#include "wdix/panel.hpp"

namespace wdix {

/// Everything derived from one dataset under one grouping choice.
struct Analysis {
  IndicatorDataset dataset;
  ValidData valid;
  std::optional<GroupVar> group;
  std::vector<DiagnosticRecord> records;  // with region/income/lending labels
};

/// Validates the panel, computes the ten indices and appends group labels. The CLI
/// and the HTTP service both go through here.
inline Analysis analyse(IndicatorDataset dataset, std::optional<GroupVar> group) {
  Analysis a;
  a.valid = get_valid_data(dataset);
  a.group = group;
  a.records = add_group_info(compute_diagnostic_indices(a.valid.panel, group), dataset);
  a.dataset = std::move(dataset);
  return a;
}

}  // namespace wdix
