#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wdix/dataset.hpp"
#include "wdix/error.hpp"

namespace wdix {

enum class GroupVar { Region, Income, Lending };

inline constexpr std::array<GroupVar, 3> kGroupVars = {GroupVar::Region, GroupVar::Income,
                                                       GroupVar::Lending};

inline constexpr std::string_view kUnclassified = "Unclassified";

constexpr std::string_view to_string(GroupVar g) {
  switch (g) {
    case GroupVar::Region: return "region";
    case GroupVar::Income: return "income";
    case GroupVar::Lending: return "lending";
  }
  return "";
}

inline GroupVar parse_group_var(std::string_view name) {
  for (auto g : kGroupVars) {
    if (to_string(g) == name) return g;
  }
  throw Error(ErrorCode::UnknownGroupVar,
              "'" + std::string(name) + "' (expected region, income or lending)");
}

inline const std::string& raw_label(const Record& r, GroupVar g) {
  switch (g) {
    case GroupVar::Region: return r.region;
    case GroupVar::Income: return r.income;
    case GroupVar::Lending: return r.lending;
  }
  return r.region;
}

inline std::string group_label(const Record& r, GroupVar g) {
  const auto& label = raw_label(r, g);
  return label.empty() ? std::string(kUnclassified) : label;
}

inline bool is_valid_value(const std::optional<double>& v) { return v && std::isfinite(*v); }

struct GroupVariable {
  GroupVar name = GroupVar::Region;
  std::vector<std::string> levels;
};

/// Descriptive fields carried per country so a panel can be turned back into rows.
struct CountryInfo {
  std::string iso2c;
  std::string iso3c;
  std::string status;
  std::string lastupdated;
  std::string region;
  std::string capital;
  std::string longitude;
  std::string latitude;
  std::string income;
  std::string lending;
};

struct ValidPanel {
  std::vector<std::string> countries;
  std::vector<int> years;
  std::vector<std::optional<double>> values;  // row-major, country x year
  std::vector<CountryInfo> info;
  std::map<GroupVar, std::vector<std::string>> group_labels;  // per country, in panel order
  std::string index_name;

  std::size_t country_count() const { return countries.size(); }
  std::size_t year_count() const { return years.size(); }

  const std::optional<double>& value(std::size_t country, std::size_t year) const {
    return values[country * years.size() + year];
  }

  /// Observed values for one country in year order, gaps dropped.
  std::vector<double> observed(std::size_t country) const {
    std::vector<double> out;
    out.reserve(years.size());
    for (std::size_t k = 0; k < years.size(); ++k) {
      if (const auto& v = value(country, k); is_valid_value(v)) out.push_back(*v);
    }
    return out;
  }

  std::optional<std::size_t> find(std::string_view country) const {
    auto it = std::lower_bound(countries.begin(), countries.end(), country);
    if (it == countries.end() || *it != country) return std::nullopt;
    return static_cast<std::size_t>(it - countries.begin());
  }

  const std::vector<std::string>& labels(GroupVar g) const { return group_labels.at(g); }

  GroupVariable group_variable(GroupVar g) const {
    const auto& l = labels(g);
    std::set<std::string> levels(l.begin(), l.end());
    return {g, {levels.begin(), levels.end()}};
  }
};

struct ExclusionReport {
  std::vector<std::string> excluded_countries;
  std::vector<int> excluded_years;
  std::size_t retained_country_count = 0;
  std::size_t retained_year_count = 0;
};

struct ValidData {
  ValidPanel panel;
  ExclusionReport report;
};

namespace detail {

struct CountryRows {
  const Record* first = nullptr;
  std::map<int, const Record*> by_year;
};

// Groups non-aggregate rows by country name. Names compare by UTF-8 bytes, which is
// code point order.
inline std::map<std::string, CountryRows> group_rows(const IndicatorDataset& ds) {
  std::map<std::string, CountryRows> out;
  for (const auto& r : ds.rows) {
    if (is_aggregate(r)) continue;
    auto& slot = out[r.country];
    if (!slot.first) slot.first = &r;
    slot.by_year.emplace(r.year, &r);
  }
  return out;
}

inline std::pair<int, int> year_span(const IndicatorDataset& ds) {
  if (ds.rows.empty()) return {0, -1};
  auto [lo, hi] = std::minmax_element(ds.rows.begin(), ds.rows.end(),
                                      [](const Record& a, const Record& b) { return a.year < b.year; });
  return {lo->year, hi->year};
}

}  // namespace detail

/// Drops aggregates, then every country and every year without a single valid value.
inline ValidData get_valid_data(const IndicatorDataset& ds) {
  if (ds.indicator_code.empty()) {
    throw Error(ErrorCode::SchemaMismatch, "dataset has no index variable name");
  }
  const auto rows = detail::group_rows(ds);

  std::set<int> all_years;
  std::set<int> valid_years;
  for (const auto& [name, cr] : rows) {
    for (const auto& [year, rec] : cr.by_year) {
      all_years.insert(year);
      if (is_valid_value(rec->value)) valid_years.insert(year);
    }
  }
  if (valid_years.empty()) {
    throw Error(ErrorCode::EmptyPanel, "no valid observations for " + ds.indicator_code);
  }

  ValidData out;
  auto& panel = out.panel;
  auto& report = out.report;
  panel.index_name = ds.indicator_code;
  panel.years.assign(valid_years.begin(), valid_years.end());
  std::set_difference(all_years.begin(), all_years.end(), valid_years.begin(), valid_years.end(),
                      std::back_inserter(report.excluded_years));

  for (auto g : kGroupVars) panel.group_labels[g];
  for (const auto& [name, cr] : rows) {
    std::vector<std::optional<double>> row(panel.years.size());
    bool any = false;
    for (std::size_t k = 0; k < panel.years.size(); ++k) {
      auto it = cr.by_year.find(panel.years[k]);
      if (it != cr.by_year.end() && is_valid_value(it->second->value)) {
        row[k] = it->second->value;
        any = true;
      }
    }
    if (!any) {
      report.excluded_countries.push_back(name);
      continue;
    }
    const Record& r = *cr.first;
    panel.countries.push_back(name);
    panel.values.insert(panel.values.end(), row.begin(), row.end());
    panel.info.push_back({r.iso2c, r.iso3c, r.status, r.lastupdated, r.region, r.capital,
                          r.longitude, r.latitude, r.income, r.lending});
    for (auto g : kGroupVars) panel.group_labels[g].push_back(group_label(r, g));
  }
  report.retained_country_count = panel.countries.size();
  report.retained_year_count = panel.years.size();
  return out;
}

/// Rebuilds rows for every retained country-year cell; gaps become missing values.
inline IndicatorDataset to_dataset(const ValidPanel& panel) {
  IndicatorDataset ds;
  ds.indicator_code = panel.index_name;
  ds.rows.reserve(panel.values.size());
  for (std::size_t i = 0; i < panel.countries.size(); ++i) {
    const auto& ci = panel.info[i];
    for (std::size_t k = 0; k < panel.years.size(); ++k) {
      ds.rows.push_back({panel.countries[i], ci.iso2c, ci.iso3c, panel.years[k], panel.value(i, k),
                         ci.status, ci.lastupdated, ci.region, ci.capital, ci.longitude,
                         ci.latitude, ci.income, ci.lending});
    }
  }
  return ds;
}

inline std::string format_exclusion_report(const ExclusionReport& report) {
  std::ostringstream os;
  os << "Excluded " << report.excluded_countries.size()
     << " countries with no valid observations";
  if (report.excluded_countries.empty()) {
    os << ".\n";
  } else {
    os << ":\n";
    for (const auto& c : report.excluded_countries) os << "  - " << c << "\n";
  }
  os << "Excluded " << report.excluded_years.size() << " years with no valid observations";
  if (report.excluded_years.empty()) {
    os << ".\n";
  } else {
    os << ":\n ";
    for (std::size_t i = 0; i < report.excluded_years.size(); ++i) {
      os << " " << report.excluded_years[i];
      if (i + 1 < report.excluded_years.size()) os << (i % 10 == 9 ? ",\n " : ",");
    }
    os << "\n";
  }
  os << "Retained " << report.retained_country_count << " countries x "
     << report.retained_year_count << " years.\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Missingness
// ---------------------------------------------------------------------------

struct MissingnessEntry {
  std::string country;
  std::string group_label;
  int n_miss = 0;
  double pct_miss = 0.0;
};

struct MissingnessSummary {
  GroupVar group_var = GroupVar::Region;
  int first_year = 0;
  int last_year = -1;
  std::vector<MissingnessEntry> entries;
  double overall_pct_missing = 0.0;
  double overall_pct_present = 0.0;

  int total_years() const { return last_year - first_year + 1; }
};

/// Missing counts over the raw year span, one entry per non-aggregate country,
/// sorted by n_miss descending then country.
inline MissingnessSummary missingness_summary(const IndicatorDataset& ds, GroupVar g) {
  MissingnessSummary out;
  out.group_var = g;
  std::tie(out.first_year, out.last_year) = detail::year_span(ds);
  const int span = std::max(out.total_years(), 0);
  long total_missing = 0;
  long total_cells = 0;
  for (const auto& [name, cr] : detail::group_rows(ds)) {
    int present = 0;
    for (const auto& [year, rec] : cr.by_year) {
      if (is_valid_value(rec->value)) ++present;
    }
    MissingnessEntry e{name, group_label(*cr.first, g), span - present, 0.0};
    e.pct_miss = span > 0 ? 100.0 * e.n_miss / span : 0.0;
    total_missing += e.n_miss;
    total_cells += span;
    out.entries.push_back(std::move(e));
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const MissingnessEntry& a, const MissingnessEntry& b) {
                     return a.n_miss > b.n_miss;
                   });
  if (total_cells > 0) {
    out.overall_pct_missing = 100.0 * static_cast<double>(total_missing) / total_cells;
    out.overall_pct_present = 100.0 * static_cast<double>(total_cells - total_missing) / total_cells;
  }
  return out;
}

struct MissingnessGrid {
  GroupVar group_var = GroupVar::Region;
  std::vector<std::string> countries;  // ordered by group level, then name
  std::vector<std::string> labels;     // group level per country
  std::vector<int> years;              // full raw span
  std::vector<bool> present;           // row-major, country x year
  double overall_pct_missing = 0.0;
  double overall_pct_present = 0.0;

  bool is_present(std::size_t country, std::size_t year) const {
    return present[country * years.size() + year];
  }
  std::size_t missing_cells() const {
    return static_cast<std::size_t>(std::count(present.begin(), present.end(), false));
  }
};

inline MissingnessGrid missingness_grid(const IndicatorDataset& ds, GroupVar g) {
  MissingnessGrid grid;
  grid.group_var = g;
  auto [first, last] = detail::year_span(ds);
  for (int y = first; y <= last; ++y) grid.years.push_back(y);

  const auto rows = detail::group_rows(ds);
  std::vector<std::pair<std::string, const detail::CountryRows*>> order;
  for (const auto& [name, cr] : rows) order.emplace_back(group_label(*cr.first, g), &cr);
  // std::map iteration already sorts by name; a stable sort on label keeps that within levels.
  std::vector<std::string> names;
  for (const auto& [name, cr] : rows) names.push_back(name);
  std::vector<std::size_t> idx(order.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return order[a].first < order[b].first; });

  std::size_t missing = 0;
  for (auto i : idx) {
    grid.countries.push_back(names[i]);
    grid.labels.push_back(order[i].first);
    for (int y : grid.years) {
      auto it = order[i].second->by_year.find(y);
      bool ok = it != order[i].second->by_year.end() && is_valid_value(it->second->value);
      grid.present.push_back(ok);
      if (!ok) ++missing;
    }
  }
  if (!grid.present.empty()) {
    const double cells = static_cast<double>(grid.present.size());
    grid.overall_pct_missing = 100.0 * static_cast<double>(missing) / cells;
    grid.overall_pct_present = 100.0 * static_cast<double>(grid.present.size() - missing) / cells;
  }
  return grid;
}

}  // namespace wdix
