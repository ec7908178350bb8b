#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "wdix/diagnostics.hpp"
#include "wdix/pipeline.hpp"

using namespace wdix;
using wdix::testing::make_dataset;
using wdix::testing::NA;
using wdix::testing::SyntheticCountry;

namespace {

IndicatorDataset mixed_dataset(std::uint64_t seed, std::size_t countries = 24, std::size_t years = 30) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution miss(0.1);
  const char* regions[] = {"East Asia & Pacific", "Sub-Saharan Africa", "Europe & Central Asia",
                           "Latin America & Caribbean"};
  const char* incomes[] = {"Low income", "High income", ""};
  std::vector<SyntheticCountry> cs;
  for (std::size_t c = 0; c < countries; ++c) {
    SyntheticCountry sc{"Country " + std::to_string(c), regions[c % 4], incomes[c % 3], "IBRD"};
    sc.values = wdix::testing::random_walk(rng, years, 20.0 + 3.0 * static_cast<double>(c));
    for (auto& v : sc.values)
      if (miss(rng)) v = NA;
    cs.push_back(sc);
  }
  cs.push_back({"World", "Aggregates", "", "", std::vector<double>(years, 1.0)});
  return make_dataset(cs, 1990);
}

DiagnosticRecord record_with(const std::string& name, std::optional<double> v,
                             const std::string& region = "R") {
  DiagnosticRecord r;
  r.country = name;
  r.get(Metric::Curvature) = v;
  r.group_labels[GroupVar::Region] = region;
  return r;
}

}  // namespace

TEST(Registry, TenMetricsInOrder) {
  ASSERT_EQ(kMetrics.size(), 10u);
  const char* names[] = {"country_avg_dist", "within_group_avg_dist", "sil_width",
                         "trend_strength",   "linearity",             "curvature",
                         "smoothness",       "crossing_points",       "flat_spot",
                         "acf"};
  for (std::size_t i = 0; i < kMetrics.size(); ++i) {
    EXPECT_EQ(to_string(kMetrics[i]), names[i]);
    EXPECT_EQ(parse_metric(names[i]), kMetrics[i]);
  }
  EXPECT_THROW(parse_metric("entropy"), Error);
}

TEST(Diagnostics, OneRowPerRetainedCountry) {
  const auto ds = mixed_dataset(1);
  const auto a = analyse(ds, GroupVar::Region);
  ASSERT_EQ(a.records.size(), a.valid.panel.country_count());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& r = a.records[i];
    EXPECT_EQ(r.country, a.valid.panel.countries[i]);
    for (auto m : kMetrics) EXPECT_TRUE(r.get(m).has_value()) << r.country << " " << to_string(m);
    EXPECT_EQ(r.group_labels.size(), 3u);
  }
  EXPECT_EQ(a.records[*a.valid.panel.find("Country 3")].group_labels.at(GroupVar::Income), "Low income");
  EXPECT_EQ(a.records[*a.valid.panel.find("Country 2")].group_labels.at(GroupVar::Income), "Unclassified");
  EXPECT_FALSE(a.valid.panel.find("World"));
}

TEST(Diagnostics, SilhouetteMissingWithoutGrouping) {
  const auto a = analyse(mixed_dataset(2), std::nullopt);
  for (const auto& r : a.records) {
    EXPECT_FALSE(r.get(Metric::SilWidth));
    EXPECT_TRUE(r.get(Metric::WithinGroupAvgDist));
  }
}

TEST(Diagnostics, ShortSeriesAreFlaggedNotDropped) {
  auto ds = make_dataset({{"Long", "R1", "I", "L", {1, 3, 2, 5, 4, 6, 8, 7}},
                          {"Short", "R2", "I", "L", {NA, NA, NA, NA, NA, 1, 2, NA}}},
                         2000);
  const auto a = analyse(ds, GroupVar::Region);
  ASSERT_EQ(a.records.size(), 2u);
  const auto& s = a.records[1];
  EXPECT_FALSE(s.get(Metric::TrendStrength));
  EXPECT_FALSE(s.get(Metric::Smoothness));
  EXPECT_TRUE(s.get(Metric::CrossingPoints));
  EXPECT_FALSE(s.flags.empty());
  EXPECT_TRUE(a.records[0].get(Metric::TrendStrength));
}

TEST(Diagnostics, SingleCountryPanel) {
  auto ds = make_dataset({{"Only", "R1", "I", "L", {1, 3, 2, 5, 4, 6}}}, 2000);
  const auto a = analyse(ds, GroupVar::Region);
  ASSERT_EQ(a.records.size(), 1u);
  EXPECT_FALSE(a.records[0].get(Metric::CountryAvgDist));
  EXPECT_TRUE(a.records[0].get(Metric::Acf));
}

TEST(GroupInfo, IdempotentAndLeavesMetrics) {
  const auto ds = mixed_dataset(3);
  const auto panel = get_valid_data(ds).panel;
  const auto raw = compute_diagnostic_indices(panel, GroupVar::Income);
  const auto once = add_group_info(raw, ds);
  const auto twice = add_group_info(once, ds);
  ASSERT_EQ(once.size(), twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    EXPECT_EQ(once[i].group_labels, twice[i].group_labels);
    EXPECT_EQ(once[i].metrics, raw[i].metrics);
  }
}

TEST(GroupInfo, UnknownCountryThrows) {
  const auto ds = mixed_dataset(4);
  std::vector<DiagnosticRecord> recs(1);
  recs[0].country = "Atlantis";
  try {
    add_group_info(recs, ds);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownCountry);
  }
}

TEST(Highlight, StrictlyAboveTypeSevenQuantile) {
  std::vector<DiagnosticRecord> recs;
  for (int i = 1; i <= 10; ++i) recs.push_back(record_with("C" + std::to_string(i), i));
  recs.push_back(record_with("Missing", std::nullopt));
  auto h = highlight_threshold(recs, {Metric::Curvature, 0.8, std::nullopt, false});
  EXPECT_NEAR(h.thresholds.at("all"), 8.2, 1e-12);
  EXPECT_EQ(h.highlighted, (std::vector<std::string>{"C9", "C10"}));
}

TEST(Highlight, TiesGiveEmptySet) {
  std::vector<DiagnosticRecord> recs;
  for (int i = 0; i < 6; ++i) recs.push_back(record_with("C" + std::to_string(i), 3.0));
  auto h = highlight_threshold(recs, {Metric::Curvature, 0.95, std::nullopt, false});
  EXPECT_TRUE(h.highlighted.empty());
}

TEST(Highlight, AbsoluteRanksMagnitude) {
  std::vector<DiagnosticRecord> recs;
  for (int i = 1; i <= 9; ++i) recs.push_back(record_with("C" + std::to_string(i), i));
  recs.push_back(record_with("Neg", -50));
  auto plain = highlight_threshold(recs, {Metric::Curvature, 0.9, std::nullopt, false});
  auto absolute = highlight_threshold(recs, {Metric::Curvature, 0.9, std::nullopt, true});
  EXPECT_FALSE(plain.contains("Neg"));
  EXPECT_TRUE(absolute.contains("Neg"));
}

TEST(Highlight, SingleGroupEqualsGlobal) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  std::vector<DiagnosticRecord> recs;
  for (int i = 0; i < 40; ++i) recs.push_back(record_with("C" + std::to_string(i), z(rng), "Only"));
  for (double p : {0.5, 0.9, 0.95, 0.96}) {
    auto g = highlight_threshold(recs, {Metric::Curvature, p, std::nullopt, false});
    auto w = highlight_threshold(recs, {Metric::Curvature, p, GroupVar::Region, false});
    EXPECT_EQ(g.highlighted, w.highlighted);
    EXPECT_EQ(g.thresholds.at("all"), w.thresholds.at("Only"));
  }
}

TEST(Highlight, TranslationAndScaleInvariant) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> shift(-1e3, 1e3), scale(0.01, 100);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DiagnosticRecord> base, moved;
    const double c = shift(rng), k = scale(rng);
    for (int i = 0; i < 5 + trial % 40; ++i) {
      const double v = z(rng);
      const std::string region = i % 3 ? "A" : "B";
      base.push_back(record_with("C" + std::to_string(i), v, region));
      moved.push_back(record_with("C" + std::to_string(i), k * v + c, region));
    }
    for (auto group : {std::optional<GroupVar>{}, std::optional<GroupVar>{GroupVar::Region}}) {
      const double p = 0.5 + 0.45 * (trial % 10) / 10.0;
      auto a = highlight_threshold(base, {Metric::Curvature, p, group, false});
      auto b = highlight_threshold(moved, {Metric::Curvature, p, group, false});
      EXPECT_EQ(a.highlighted, b.highlighted) << "c=" << c << " k=" << k;
    }
  }
}

TEST(Highlight, Errors) {
  std::vector<DiagnosticRecord> recs{record_with("A", std::nullopt)};
  auto code = [&](HighlightOptions o) {
    try {
      highlight_threshold(recs, o);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  EXPECT_EQ(code({Metric::Curvature, 0.9, std::nullopt, false}), ErrorCode::EmptyGroup);
  recs.push_back(record_with("B", 1.0));
  EXPECT_EQ(code({Metric::Curvature, 1.0, std::nullopt, false}), ErrorCode::InvalidArgument);
  EXPECT_EQ(code({Metric::Curvature, 0.9, GroupVar::Lending, false}), ErrorCode::UnknownGroupVar);
}

TEST(Normalize, AxesSpanUnitInterval) {
  const auto a = analyse(mixed_dataset(7), GroupVar::Region);
  const auto nm = normalize_metrics(a.records, {}, GroupVar::Region);
  ASSERT_EQ(nm.metrics.size(), kMetricCount);
  for (std::size_t c = 0; c < nm.metrics.size(); ++c) {
    double lo = 1, hi = 0;
    for (const auto& row : nm.global) {
      if (!row[c]) continue;
      lo = std::min(lo, *row[c]);
      hi = std::max(hi, *row[c]);
    }
    EXPECT_EQ(lo, 0.0);
    EXPECT_TRUE(hi == 1.0 || hi == 0.0);
    for (const auto& row : nm.within_group) {
      if (row[c]) {
        EXPECT_GE(*row[c], 0.0);
        EXPECT_LE(*row[c], 1.0);
      }
    }
  }
}

TEST(Serialization, JsonRoundTrip) {
  const auto a = analyse(mixed_dataset(8), GroupVar::Region);
  const auto text = to_json(a.records).dump();
  const auto back = records_from_json(nlohmann::json::parse(text));
  ASSERT_EQ(back.size(), a.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].country, a.records[i].country);
    EXPECT_EQ(back[i].group_labels, a.records[i].group_labels);
    EXPECT_EQ(back[i].metrics, a.records[i].metrics);
    EXPECT_EQ(back[i].flags, a.records[i].flags);
  }
  const auto j = to_json(a.records[0]);
  EXPECT_TRUE(j.at("crossing_points").is_number_integer());
  EXPECT_TRUE(j.at("acf").is_number_float());
}

TEST(Serialization, CsvRoundTrip) {
  auto ds = make_dataset({{"Short, one", "R1", "I", "L", {NA, 1, 2, NA}},
                          {"Other", "R2", "I", "L", {3, 1, 2, 5}}},
                         2000);
  const auto a = analyse(ds, GroupVar::Region);
  const auto back = records_from_csv(to_csv(a.records));
  ASSERT_EQ(back.size(), a.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].country, a.records[i].country);
    EXPECT_EQ(back[i].group_labels, a.records[i].group_labels);
    EXPECT_EQ(back[i].metrics, a.records[i].metrics);
  }
}

TEST(Serialization, RejectsReorderedColumns) {
  EXPECT_THROW(records_from_csv("country,acf\nA,1\n"), Error);
  EXPECT_THROW(records_from_csv("name\n"), Error);
}
