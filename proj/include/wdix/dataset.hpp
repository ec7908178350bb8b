#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <utility>
#include <vector>

#include "wdix/csv.hpp"
#include "wdix/error.hpp"

namespace wdix {

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double value) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

inline std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) return std::nullopt;
  return value;
}

inline std::optional<int> parse_int(std::string_view text) {
  int value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) return std::nullopt;
  return value;
}

/// World Bank indicator codes: upper-case letters, digits, '.' and '_'.
inline bool is_valid_indicator_code(std::string_view code) {
  if (code.empty()) return false;
  return std::all_of(code.begin(), code.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '_';
  });
}

struct IndicatorRequest {
  std::string indicator_code;
  bool refresh = false;

  void validate() const {
    if (!is_valid_indicator_code(indicator_code)) {
      throw Error(ErrorCode::InvalidArgument,
                  "indicator code '" + indicator_code + "' must match [A-Z0-9._]+");
    }
  }
};

/// One country-year observation with its descriptive fields, in cache column order.
struct Record {
  std::string country;
  std::string iso2c;
  std::string iso3c;
  int year = 0;
  std::optional<double> value;
  std::string status;
  std::string lastupdated;
  std::string region;
  std::string capital;
  std::string longitude;
  std::string latitude;
  std::string income;
  std::string lending;

  friend bool operator==(const Record&, const Record&) = default;
};

inline constexpr std::size_t kRecordFieldCount = 13;
inline constexpr std::size_t kValueColumn = 4;

/// Region value the API uses for regional and income aggregates.
inline constexpr std::string_view kAggregateRegion = "Aggregates";

inline std::array<std::string, kRecordFieldCount> cache_header(std::string_view indicator_code) {
  return {"country", "iso2c",     "iso3c",    "year",   std::string(indicator_code),
          "status",  "lastupdated", "region", "capital", "longitude",
          "latitude", "income",   "lending"};
}

struct IndicatorDataset {
  std::vector<Record> rows;
  std::string indicator_code;

  std::size_t row_count() const { return rows.size(); }
  static constexpr std::size_t column_count() { return kRecordFieldCount; }

  friend bool operator==(const IndicatorDataset&, const IndicatorDataset&) = default;
};

inline bool is_aggregate(const Record& r) { return r.region == kAggregateRegion; }

// Sorts rows by (country, iso3c, year) and drops later duplicates of the same key.
inline void normalize(IndicatorDataset& ds) {
  std::stable_sort(ds.rows.begin(), ds.rows.end(), [](const Record& a, const Record& b) {
    return std::tie(a.country, a.iso3c, a.year) < std::tie(b.country, b.iso3c, b.year);
  });
  auto last = std::unique(ds.rows.begin(), ds.rows.end(), [](const Record& a, const Record& b) {
    return a.country == b.country && a.iso3c == b.iso3c && a.year == b.year;
  });
  ds.rows.erase(last, ds.rows.end());
}

/// Countries whose rows carry no ISO2 or ISO3 code.
inline std::vector<std::string> rows_missing_iso(const IndicatorDataset& ds) {
  std::set<std::string> names;
  for (const auto& r : ds.rows) {
    if (r.iso2c.empty() || r.iso3c.empty()) names.insert(r.country);
  }
  return {names.begin(), names.end()};
}

inline std::string to_csv(const IndicatorDataset& ds) {
  std::string out;
  const auto header = cache_header(ds.indicator_code);
  csv::append_row(out, csv::Row(header.begin(), header.end()));
  for (const auto& r : ds.rows) {
    csv::append_row(out, {r.country, r.iso2c, r.iso3c, std::to_string(r.year),
                          r.value ? format_double(*r.value) : std::string{}, r.status,
                          r.lastupdated, r.region, r.capital, r.longitude, r.latitude, r.income,
                          r.lending});
  }
  return out;
}

/// Parses a 13-column panel table. The value column's header names the index
/// variable unless `index_name` overrides it. Empty, "NA" and "NaN" values are missing.
inline IndicatorDataset from_csv(std::string_view text, std::string_view index_name = {}) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw Error(ErrorCode::SchemaMismatch, "empty table, header expected");

  const auto& head = rows.front();
  if (head.size() != kRecordFieldCount) {
    throw Error(ErrorCode::SchemaMismatch,
                "expected 13 columns, header has " + std::to_string(head.size()));
  }
  const auto expected = cache_header(head[kValueColumn]);
  for (std::size_t i = 0; i < kRecordFieldCount; ++i) {
    if (head[i] != expected[i]) {
      throw Error(ErrorCode::SchemaMismatch,
                  "column " + std::to_string(i + 1) + " is '" + head[i] + "', expected '" +
                      expected[i] + "'");
    }
  }

  IndicatorDataset ds;
  ds.indicator_code = index_name.empty() ? head[kValueColumn] : std::string(index_name);
  if (ds.indicator_code.empty()) throw Error(ErrorCode::SchemaMismatch, "index name is empty");
  ds.rows.reserve(rows.size() - 1);

  std::set<std::tuple<std::string, std::string, int>> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    const std::string where = "row " + std::to_string(i + 1);
    if (f.size() != kRecordFieldCount) {
      throw Error(ErrorCode::SchemaMismatch,
                  where + " has " + std::to_string(f.size()) + " fields, expected 13");
    }
    Record r;
    r.country = f[0];
    r.iso2c = f[1];
    r.iso3c = f[2];
    auto year = parse_int(f[3]);
    if (!year) throw Error(ErrorCode::SchemaMismatch, where + " has non-integer year '" + f[3] + "'");
    r.year = *year;
    const auto& v = f[kValueColumn];
    if (!v.empty() && v != "NA" && v != "NaN") {
      auto value = parse_double(v);
      if (!value) throw Error(ErrorCode::SchemaMismatch, where + " has non-numeric value '" + v + "'");
      r.value = value;
    }
    r.status = f[5];
    r.lastupdated = f[6];
    r.region = f[7];
    r.capital = f[8];
    r.longitude = f[9];
    r.latitude = f[10];
    r.income = f[11];
    r.lending = f[12];
    if (r.country.empty()) throw Error(ErrorCode::SchemaMismatch, where + " has an empty country");
    if (!seen.emplace(r.country, r.iso3c, r.year).second) {
      throw Error(ErrorCode::SchemaMismatch,
                  where + " duplicates (" + r.country + ", " + std::to_string(r.year) + ")");
    }
    ds.rows.push_back(std::move(r));
  }
  return ds;
}

}  // namespace wdix
