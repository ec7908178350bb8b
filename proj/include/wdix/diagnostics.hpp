#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "wdix/csv.hpp"
#include "wdix/dataset.hpp"
#include "wdix/error.hpp"
#include "wdix/features.hpp"
#include "wdix/panel.hpp"
#include "wdix/variation.hpp"

namespace wdix {

// ---------------------------------------------------------------------------
// Metric registry
// ---------------------------------------------------------------------------

enum class Metric {
  CountryAvgDist,
  WithinGroupAvgDist,
  SilWidth,
  TrendStrength,
  Linearity,
  Curvature,
  Smoothness,
  CrossingPoints,
  FlatSpot,
  Acf,
};

inline constexpr std::size_t kMetricCount = 10;

inline constexpr std::array<Metric, kMetricCount> kMetrics = {
    Metric::CountryAvgDist, Metric::WithinGroupAvgDist, Metric::SilWidth,
    Metric::TrendStrength,  Metric::Linearity,          Metric::Curvature,
    Metric::Smoothness,     Metric::CrossingPoints,     Metric::FlatSpot,
    Metric::Acf};

constexpr std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::CountryAvgDist: return "country_avg_dist";
    case Metric::WithinGroupAvgDist: return "within_group_avg_dist";
    case Metric::SilWidth: return "sil_width";
    case Metric::TrendStrength: return "trend_strength";
    case Metric::Linearity: return "linearity";
    case Metric::Curvature: return "curvature";
    case Metric::Smoothness: return "smoothness";
    case Metric::CrossingPoints: return "crossing_points";
    case Metric::FlatSpot: return "flat_spot";
    case Metric::Acf: return "acf";
  }
  return "";
}

constexpr bool is_integer_metric(Metric m) {
  return m == Metric::CrossingPoints || m == Metric::FlatSpot;
}

inline Metric parse_metric(std::string_view name) {
  for (auto m : kMetrics) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::UnknownMetric, "'" + std::string(name) + "'");
}

inline std::size_t index_of(Metric m) { return static_cast<std::size_t>(m); }

// ---------------------------------------------------------------------------
// Family records
// ---------------------------------------------------------------------------

struct TrendShapeRecord {
  std::string country;
  std::optional<double> trend_strength;
  std::optional<double> linearity;
  std::optional<double> curvature;
  std::optional<double> smoothness;
  std::vector<std::string> flags;
};

struct TemporalRecord {
  std::string country;
  std::optional<int> crossing_points;
  std::optional<int> flat_spot;
  std::optional<double> acf;
  std::vector<std::string> flags;
};

namespace detail {

template <typename F>
auto guarded(F&& f, std::vector<std::string>& flags, std::string_view metric)
    -> std::optional<decltype(f())> {
  try {
    return f();
  } catch (const Error& e) {
    flags.push_back(std::string(metric) + ": " + std::string(to_string(e.code())));
    return std::nullopt;
  }
}

}  // namespace detail

/// Trend/shape family for every panel country over its observed points. Countries
/// that fail a precondition keep their row with missing values and a flag.
inline std::vector<TrendShapeRecord> compute_trend_shape_features(const ValidPanel& panel) {
  std::vector<TrendShapeRecord> out;
  out.reserve(panel.country_count());
  for (std::size_t i = 0; i < panel.country_count(); ++i) {
    const auto y = panel.observed(i);
    TrendShapeRecord r;
    r.country = panel.countries[i];
    r.trend_strength = detail::guarded([&] { return trend_strength(y); }, r.flags, "trend_strength");
    if (auto c = detail::guarded([&] { return linearity_curvature(y); }, r.flags, "linearity")) {
      r.linearity = c->beta1;
      r.curvature = c->beta2;
    }
    r.smoothness = detail::guarded([&] { return smoothness(y); }, r.flags, "smoothness");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<TemporalRecord> compute_temporal_features(const ValidPanel& panel) {
  std::vector<TemporalRecord> out;
  out.reserve(panel.country_count());
  for (std::size_t i = 0; i < panel.country_count(); ++i) {
    const auto y = panel.observed(i);
    TemporalRecord r;
    r.country = panel.countries[i];
    r.crossing_points =
        detail::guarded([&] { return crossing_points(y); }, r.flags, "crossing_points");
    r.flat_spot = detail::guarded([&] { return flat_spot(y); }, r.flags, "flat_spot");
    if (auto a = detail::guarded([&] { return acf1(y); }, r.flags, "acf")) {
      r.acf = *a;
      if (!*a) r.flags.push_back("acf: DegenerateVariance");
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Combined table
// ---------------------------------------------------------------------------

struct DiagnosticRecord {
  std::string country;
  std::map<GroupVar, std::string> group_labels;  // filled by add_group_info
  std::array<std::optional<double>, kMetricCount> metrics{};
  std::vector<std::string> flags;

  const std::optional<double>& get(Metric m) const { return metrics[index_of(m)]; }
  std::optional<double>& get(Metric m) { return metrics[index_of(m)]; }
};

/// All ten indices per country. Without a grouping variable every country sits in
/// one group, so silhouette width is undefined.
inline std::vector<DiagnosticRecord> compute_diagnostic_indices(
    const ValidPanel& panel, std::optional<GroupVar> group = std::nullopt) {
  const std::size_t n = panel.country_count();
  std::vector<DiagnosticRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i].country = panel.countries[i];

  if (n >= 2) {
    const auto labels =
        group ? panel.labels(*group) : std::vector<std::string>(n, std::string("all"));
    const auto variation = compute_variation(compute_dissimilarity(panel), labels);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& v = variation[i];
      out[i].get(Metric::CountryAvgDist) = v.country_avg_dist;
      out[i].get(Metric::WithinGroupAvgDist) = v.within_group_avg_dist;
      out[i].get(Metric::SilWidth) = v.sil_width;
      if (!v.country_avg_dist) out[i].flags.push_back("country_avg_dist: NoSharedYears");
      if (!v.within_group_avg_dist) out[i].flags.push_back("within_group_avg_dist: SingletonGroup");
      if (!v.sil_width) out[i].flags.push_back("sil_width: NoOtherGroup");
    }
  } else {
    for (auto& r : out) r.flags.push_back("variation: SingleCountry");
  }

  const auto shape = compute_trend_shape_features(panel);
  const auto temporal = compute_temporal_features(panel);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = out[i];
    r.get(Metric::TrendStrength) = shape[i].trend_strength;
    r.get(Metric::Linearity) = shape[i].linearity;
    r.get(Metric::Curvature) = shape[i].curvature;
    r.get(Metric::Smoothness) = shape[i].smoothness;
    if (temporal[i].crossing_points) r.get(Metric::CrossingPoints) = *temporal[i].crossing_points;
    if (temporal[i].flat_spot) r.get(Metric::FlatSpot) = *temporal[i].flat_spot;
    r.get(Metric::Acf) = temporal[i].acf;
    r.flags.insert(r.flags.end(), shape[i].flags.begin(), shape[i].flags.end());
    r.flags.insert(r.flags.end(), temporal[i].flags.begin(), temporal[i].flags.end());
  }
  return out;
}

/// Appends region, income and lending labels from the dataset. Metric values are untouched.
inline std::vector<DiagnosticRecord> add_group_info(std::vector<DiagnosticRecord> records,
                                                    const IndicatorDataset& ds) {
  std::map<std::string, const Record*> first_row;
  for (const auto& r : ds.rows) {
    if (!is_aggregate(r)) first_row.emplace(r.country, &r);
  }
  for (auto& rec : records) {
    auto it = first_row.find(rec.country);
    if (it == first_row.end()) throw Error(ErrorCode::UnknownCountry, rec.country);
    for (auto g : kGroupVars) rec.group_labels[g] = group_label(*it->second, g);
  }
  return records;
}

// ---------------------------------------------------------------------------
// Percentile highlighting
// ---------------------------------------------------------------------------

struct HighlightOptions {
  Metric metric = Metric::CountryAvgDist;
  double percentile = 0.95;
  std::optional<GroupVar> group;
  bool absolute = false;  // rank on |value|
};

inline constexpr std::string_view kGlobalScope = "all";

struct HighlightSet {
  Metric metric = Metric::CountryAvgDist;
  double percentile = 0.95;
  std::optional<GroupVar> group;
  bool absolute = false;
  std::map<std::string, double> thresholds;  // scope key -> threshold
  std::vector<std::string> highlighted;      // in record order

  bool contains(std::string_view country) const {
    return std::find(highlighted.begin(), highlighted.end(), country) != highlighted.end();
  }
};

/// Type-7 quantile threshold per scope; a country is highlighted when its value
/// strictly exceeds its scope's threshold. Missing values never participate.
inline HighlightSet highlight_threshold(const std::vector<DiagnosticRecord>& records,
                                        const HighlightOptions& opt) {
  if (!(opt.percentile > 0.0 && opt.percentile < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "percentile must lie strictly between 0 and 1");
  }
  HighlightSet out;
  out.metric = opt.metric;
  out.percentile = opt.percentile;
  out.group = opt.group;
  out.absolute = opt.absolute;

  auto value_of = [&](const DiagnosticRecord& r) -> std::optional<double> {
    const auto& v = r.get(opt.metric);
    if (!v || !std::isfinite(*v)) return std::nullopt;
    return opt.absolute ? std::abs(*v) : *v;
  };
  auto scope_of = [&](const DiagnosticRecord& r) -> std::string {
    if (!opt.group) return std::string(kGlobalScope);
    auto it = r.group_labels.find(*opt.group);
    if (it == r.group_labels.end()) {
      throw Error(ErrorCode::UnknownGroupVar, "record for " + r.country + " has no " +
                                                  std::string(to_string(*opt.group)) +
                                                  " label; add group info first");
    }
    return it->second;
  };

  std::map<std::string, std::vector<double>> values;
  for (const auto& r : records) {
    auto scope = scope_of(r);
    auto& bucket = values[scope];
    if (auto v = value_of(r)) bucket.push_back(*v);
  }
  std::size_t usable = 0;
  for (auto& [scope, v] : values) {
    usable += v.size();
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    out.thresholds[scope] = detail::quantile_sorted(v, opt.percentile);
  }
  if (usable == 0) {
    throw Error(ErrorCode::EmptyGroup,
                "no finite " + std::string(to_string(opt.metric)) + " values to threshold");
  }
  for (const auto& r : records) {
    auto v = value_of(r);
    if (!v) continue;
    auto it = out.thresholds.find(scope_of(r));
    if (it != out.thresholds.end() && *v > it->second) out.highlighted.push_back(r.country);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parallel-coordinate normalisation
// ---------------------------------------------------------------------------

struct NormalizedMetrics {
  std::vector<Metric> metrics;
  // Per record, per selected metric: min-max scaled over all records / within group.
  std::vector<std::vector<std::optional<double>>> global;
  std::vector<std::vector<std::optional<double>>> within_group;
};

namespace detail {

inline void min_max_scale(const std::vector<DiagnosticRecord>& records,
                          const std::vector<std::size_t>& members, Metric m, std::size_t column,
                          std::vector<std::vector<std::optional<double>>>& out) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (auto i : members) {
    const auto& v = records[i].get(m);
    if (!v || !std::isfinite(*v)) continue;
    if (!any) {
      lo = hi = *v;
      any = true;
    }
    lo = std::min(lo, *v);
    hi = std::max(hi, *v);
  }
  for (auto i : members) {
    const auto& v = records[i].get(m);
    if (!v || !std::isfinite(*v)) continue;
    out[i][column] = hi > lo ? (*v - lo) / (hi - lo) : 0.0;
  }
}

}  // namespace detail

/// Scales each selected metric to [0, 1] across all records and within each level
/// of `group` (records need group info). A constant axis maps to 0; missing stays missing.
inline NormalizedMetrics normalize_metrics(const std::vector<DiagnosticRecord>& records,
                                           std::vector<Metric> metrics,
                                           std::optional<GroupVar> group) {
  if (metrics.empty()) metrics.assign(kMetrics.begin(), kMetrics.end());
  NormalizedMetrics out;
  out.metrics = metrics;
  const std::vector<std::optional<double>> blank(metrics.size());
  out.global.assign(records.size(), blank);
  out.within_group.assign(records.size(), blank);

  std::vector<std::size_t> everyone(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) everyone[i] = i;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::string key(kGlobalScope);
    if (group) {
      auto it = records[i].group_labels.find(*group);
      if (it == records[i].group_labels.end()) {
        throw Error(ErrorCode::UnknownGroupVar, "record for " + records[i].country + " has no " +
                                                    std::string(to_string(*group)) + " label");
      }
      key = it->second;
    }
    members[key].push_back(i);
  }
  for (std::size_t c = 0; c < metrics.size(); ++c) {
    detail::min_max_scale(records, everyone, metrics[c], c, out.global);
    for (const auto& [key, idx] : members) {
      detail::min_max_scale(records, idx, metrics[c], c, out.within_group);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialisation: country, group labels, then the ten metrics in registry order
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<GroupVar> label_columns(const std::vector<DiagnosticRecord>& records) {
  std::vector<GroupVar> cols;
  for (auto g : kGroupVars) {
    if (std::any_of(records.begin(), records.end(),
                    [g](const DiagnosticRecord& r) { return r.group_labels.count(g) > 0; })) {
      cols.push_back(g);
    }
  }
  return cols;
}

}  // namespace detail

inline std::string to_csv(const std::vector<DiagnosticRecord>& records) {
  const auto cols = detail::label_columns(records);
  csv::Row header{"country"};
  for (auto g : cols) header.emplace_back(to_string(g));
  for (auto m : kMetrics) header.emplace_back(to_string(m));
  std::string out;
  csv::append_row(out, header);
  for (const auto& r : records) {
    csv::Row row{r.country};
    for (auto g : cols) {
      auto it = r.group_labels.find(g);
      row.push_back(it == r.group_labels.end() ? std::string{} : it->second);
    }
    for (const auto& v : r.metrics) row.push_back(v ? format_double(*v) : std::string{});
    csv::append_row(out, row);
  }
  return out;
}

inline nlohmann::json to_json(const DiagnosticRecord& r) {
  nlohmann::json j = nlohmann::json::object();
  j["country"] = r.country;
  for (const auto& [g, label] : r.group_labels) j[std::string(to_string(g))] = label;
  for (auto m : kMetrics) {
    const auto& v = r.get(m);
    const std::string key(to_string(m));
    if (!v || !std::isfinite(*v)) {
      j[key] = nullptr;
    } else if (is_integer_metric(m)) {
      j[key] = static_cast<long>(*v);
    } else {
      j[key] = *v;
    }
  }
  j["flags"] = r.flags;
  return j;
}

inline nlohmann::json to_json(const std::vector<DiagnosticRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  return arr;
}

inline std::vector<DiagnosticRecord> records_from_json(const nlohmann::json& arr) {
  std::vector<DiagnosticRecord> out;
  for (const auto& j : arr) {
    DiagnosticRecord r;
    r.country = j.at("country").get<std::string>();
    for (auto g : kGroupVars) {
      if (auto it = j.find(std::string(to_string(g))); it != j.end()) {
        r.group_labels[g] = it->get<std::string>();
      }
    }
    for (auto m : kMetrics) {
      const auto& v = j.at(std::string(to_string(m)));
      if (!v.is_null()) r.get(m) = v.get<double>();
    }
    if (auto it = j.find("flags"); it != j.end()) r.flags = it->get<std::vector<std::string>>();
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<DiagnosticRecord> records_from_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty() || rows.front().empty() || rows.front().front() != "country") {
    throw Error(ErrorCode::SchemaMismatch, "diagnostics table must start with a country column");
  }
  const auto& head = rows.front();
  const std::size_t label_cols = head.size() - 1 - kMetricCount;
  if (head.size() < 1 + kMetricCount || label_cols > kGroupVars.size()) {
    throw Error(ErrorCode::SchemaMismatch, "unexpected diagnostics column count");
  }
  std::vector<GroupVar> cols;
  for (std::size_t c = 0; c < label_cols; ++c) cols.push_back(parse_group_var(head[1 + c]));
  for (std::size_t k = 0; k < kMetricCount; ++k) {
    if (head[1 + label_cols + k] != to_string(kMetrics[k])) {
      throw Error(ErrorCode::SchemaMismatch, "metric column '" + head[1 + label_cols + k] +
                                                 "' out of registry order");
    }
  }
  std::vector<DiagnosticRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != head.size()) {
      throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(i + 1) + " has " +
                                                 std::to_string(f.size()) + " fields");
    }
    DiagnosticRecord r;
    r.country = f[0];
    for (std::size_t c = 0; c < label_cols; ++c) r.group_labels[cols[c]] = f[1 + c];
    for (std::size_t k = 0; k < kMetricCount; ++k) {
      const auto& cell = f[1 + label_cols + k];
      if (cell.empty()) continue;
      auto v = parse_double(cell);
      if (!v) throw Error(ErrorCode::SchemaMismatch, "non-numeric metric '" + cell + "'");
      r.metrics[k] = v;
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::json to_json(const HighlightSet& h) {
  nlohmann::json thresholds = nlohmann::json::object();
  for (const auto& [scope, t] : h.thresholds) thresholds[scope] = t;
  return {{"metric", std::string(to_string(h.metric))},
          {"percentile", h.percentile},
          {"scope", h.group ? std::string(to_string(*h.group)) : std::string("global")},
          {"absolute", h.absolute},
          {"thresholds", thresholds},
          {"highlighted", h.highlighted}};
}

}  // namespace wdix
