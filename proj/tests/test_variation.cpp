#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "wdix/panel.hpp"
#include "wdix/variation.hpp"

using namespace wdix;
using wdix::testing::make_dataset;
using wdix::testing::NA;
using wdix::testing::SyntheticCountry;

namespace {

ValidPanel panel_of(const std::vector<SyntheticCountry>& cs) {
  return get_valid_data(make_dataset(cs, 2000)).panel;
}

ValidPanel random_panel(std::mt19937_64& rng, std::size_t countries, std::size_t years,
                        double p_missing, int groups = 3) {
  std::bernoulli_distribution miss(p_missing);
  std::normal_distribution<double> z(0, 5);
  std::vector<SyntheticCountry> cs;
  for (std::size_t c = 0; c < countries; ++c) {
    SyntheticCountry sc{"C" + std::to_string(100 + c), "G" + std::to_string(c % groups)};
    for (std::size_t k = 0; k < years; ++k) sc.values.push_back(miss(rng) ? NA : z(rng));
    sc.values[c % years] = z(rng);  // every country keeps at least one value
    cs.push_back(sc);
  }
  return panel_of(cs);
}

}  // namespace

TEST(Dissimilarity, CompleteDataIsEuclidean) {
  auto p = panel_of({{"A", "R", "I", "L", {1, 2, 3}}, {"B", "R", "I", "L", {4, 6, 3}}});
  auto d = compute_dissimilarity(p);
  EXPECT_DOUBLE_EQ(*d.distance(0, 1), 5.0);
  EXPECT_EQ(d.shared(0, 1), 3);
}

TEST(Dissimilarity, RescalesForMissingYears) {
  auto p = panel_of({{"A", "R", "I", "L", {1, 2, NA}}, {"B", "R", "I", "L", {4, 6, 8}}});
  auto d = compute_dissimilarity(p);
  EXPECT_NEAR(*d.distance(0, 1), std::sqrt(1.5 * 25.0), 1e-12);
  EXPECT_NEAR(*d.distance(0, 1), 6.1237, 1e-4);
}

TEST(Dissimilarity, NoSharedYearIsMissing) {
  auto p = panel_of({{"A", "R", "I", "L", {1, NA}}, {"B", "R", "I", "L", {NA, 2}},
                     {"C", "S", "I", "L", {3, 4}}});
  auto d = compute_dissimilarity(p);
  EXPECT_FALSE(d.distance(0, 1));
  EXPECT_TRUE(d.distance(0, 2));
}

TEST(Dissimilarity, SymmetricZeroDiagonalOnRandomPanels) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    auto p = random_panel(rng, 2 + trial % 15, 3 + trial % 9, 0.3);
    auto d = compute_dissimilarity(p);
    for (std::size_t i = 0; i < d.size(); ++i) {
      EXPECT_EQ(*d.distance(i, i), 0.0);
      for (std::size_t j = 0; j < d.size(); ++j) {
        auto a = d.distance(i, j), b = d.distance(j, i);
        ASSERT_EQ(a.has_value(), b.has_value());
        if (a) {
          EXPECT_EQ(*a, *b);
          EXPECT_GE(*a, 0.0);
        }
      }
    }
  }
}

TEST(Dissimilarity, RescalingEqualsEuclideanWithoutGaps) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = random_panel(rng, 2 + trial % 10, 1 + trial % 12, 0.0);
    auto d = compute_dissimilarity(p);
    for (std::size_t i = 0; i < d.size(); ++i) {
      for (std::size_t j = 0; j < d.size(); ++j) {
        double ss = 0;
        for (std::size_t k = 0; k < p.year_count(); ++k) {
          const double diff = *p.value(i, k) - *p.value(j, k);
          ss += diff * diff;
        }
        EXPECT_NEAR(*d.distance(i, j), std::sqrt(ss), 1e-12);
      }
    }
  }
}

TEST(Dissimilarity, SingleCountryThrows) {
  EXPECT_THROW(compute_dissimilarity(panel_of({{"A", "R", "I", "L", {1, 2}}})), Error);
}

TEST(Silhouette, TwoByTwoGroups) {
  auto p = panel_of({{"A", "G1", "I", "L", {0}}, {"B", "G1", "I", "L", {1}},
                     {"C", "G2", "I", "L", {10}}, {"D", "G2", "I", "L", {11}}});
  auto v = compute_variation(p, GroupVar::Region);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_NEAR(*v[0].sil_width, 1.0 - 1.0 / 10.5, 1e-12);
  EXPECT_NEAR(*v[1].sil_width, 1.0 - 1.0 / 9.5, 1e-12);
  EXPECT_NEAR(*v[0].within_group_avg_dist, 1.0, 1e-12);
  EXPECT_NEAR(*v[0].country_avg_dist, (1.0 + 10.0 + 11.0) / 3.0, 1e-12);
  EXPECT_EQ(v[0].usable_pairs, 3);
}

TEST(Silhouette, SingletonAndSoleGroup) {
  auto p = panel_of({{"A", "G1", "I", "L", {0}}, {"B", "G1", "I", "L", {1}},
                     {"C", "G2", "I", "L", {10}}});
  auto v = compute_variation(p, GroupVar::Region);
  EXPECT_EQ(v[2].sil_width, 0.0);
  EXPECT_FALSE(v[2].within_group_avg_dist);
  auto one = compute_variation(p, GroupVar::Income);  // everyone in "I"
  for (const auto& r : one) EXPECT_FALSE(r.sil_width);
}

TEST(Silhouette, BoundedOnRandomPanels) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    auto p = random_panel(rng, 3 + trial % 20, 2 + trial % 10, 0.25, 1 + trial % 4);
    std::vector<VariationRecord> v;
    try {
      v = compute_variation(p, GroupVar::Region);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::AllPairsMissing);
      continue;
    }
    for (const auto& r : v) {
      if (!r.sil_width) continue;
      EXPECT_GE(*r.sil_width, -1.0);
      EXPECT_LE(*r.sil_width, 1.0);
    }
  }
}

TEST(Silhouette, WellSeparatedGroupsScoreHigh) {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> z(0, 1);
  std::vector<SyntheticCountry> cs;
  const double centres[3] = {0, 50, 100};
  for (int g = 0; g < 3; ++g) {
    for (int c = 0; c < 8; ++c) {
      SyntheticCountry sc{"G" + std::to_string(g) + "C" + std::to_string(c), "R" + std::to_string(g)};
      for (int k = 0; k < 10; ++k) sc.values.push_back(centres[g] + z(rng));
      cs.push_back(sc);
    }
  }
  for (const auto& r : compute_variation(panel_of(cs), GroupVar::Region)) {
    EXPECT_GT(*r.sil_width, 0.8) << r.country;
  }
}

TEST(Variation, AllPairsMissingThrows) {
  auto p = panel_of({{"A", "G1", "I", "L", {1, NA}}, {"B", "G2", "I", "L", {NA, 2}}});
  try {
    compute_variation(p, GroupVar::Region);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllPairsMissing);
  }
}

TEST(Variation, RejectsForeignMatrix) {
  auto p = panel_of({{"A", "G1", "I", "L", {1}}, {"B", "G2", "I", "L", {2}}});
  auto q = panel_of({{"A", "G1", "I", "L", {1}}, {"Z", "G2", "I", "L", {2}}});
  auto d = compute_dissimilarity(q);
  EXPECT_THROW(compute_variation(p, GroupVar::Region, &d), Error);
}
