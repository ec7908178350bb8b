#include <gtest/gtest.h>

#include <fstream>

#include "mock_wdi.hpp"
#include "support.hpp"
#include "wdix/wdi_client.hpp"

using namespace wdix;
using wdix::testing::MockWdi;
using wdix::testing::TempDir;

namespace {

ClientConfig config_for(const MockWdi& mock, const TempDir& dir, int per_page = 20000) {
  ClientConfig cfg;
  cfg.api_base = mock.base();
  cfg.data_dir = dir.path();
  cfg.per_page = per_page;
  cfg.max_retries = 2;
  cfg.initial_backoff = std::chrono::milliseconds(1);
  cfg.timeout = std::chrono::seconds(5);
  return cfg;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(WdiClient, FetchBuildsThirteenColumnCache) {
  MockWdi mock;
  TempDir dir;
  WdiClient client(config_for(mock, dir));
  auto res = client.fetch({"TEST.IND", false});
  EXPECT_FALSE(res.cache_hit);
  EXPECT_EQ(res.dataset.row_count(), 15u);
  EXPECT_EQ(IndicatorDataset::column_count(), 13u);
  EXPECT_TRUE(std::filesystem::exists(res.cache_path));

  const auto& first = res.dataset.rows.front();
  EXPECT_EQ(first.country, "Albania");
  EXPECT_EQ(first.iso3c, "ALB");
  EXPECT_EQ(first.year, 2015);
  EXPECT_EQ(first.value, 10.0);
  EXPECT_EQ(first.lastupdated, "2025-07-01");
  EXPECT_EQ(first.region, "Europe & Central Asia");
  EXPECT_EQ(first.lending, "IBRD");
  EXPECT_EQ(first.capital, "Capital of Albania");

  // Chad's metadata entry has a different iso3 and is joined through iso2.
  const auto& chad = res.dataset.rows[11];
  EXPECT_EQ(chad.country, "Chad");
  EXPECT_EQ(chad.income, "Low income");
  EXPECT_FALSE(chad.value);
}

TEST(WdiClient, CacheRoundTripsAndWarmFetchIsOffline) {
  MockWdi mock;
  TempDir dir;
  WdiClient client(config_for(mock, dir));
  auto cold = client.fetch({"TEST.IND", false});
  const int hits = mock.hits;
  auto warm = client.fetch({"TEST.IND", false});
  EXPECT_TRUE(warm.cache_hit);
  EXPECT_EQ(warm.network_requests, 0u);
  EXPECT_EQ(mock.hits, hits);
  EXPECT_EQ(warm.dataset.rows, cold.dataset.rows);
  EXPECT_EQ(warm.dataset.indicator_code, "TEST.IND");

  auto refreshed = client.fetch({"TEST.IND", true});
  EXPECT_FALSE(refreshed.cache_hit);
  EXPECT_GT(mock.hits, hits);
}

TEST(WdiClient, PaginationCollectsEveryPage) {
  MockWdi mock;
  TempDir dir;
  WdiClient client(config_for(mock, dir, 4));
  auto res = client.fetch({"TEST.IND", false});
  EXPECT_EQ(res.dataset.row_count(), 15u);
  EXPECT_EQ(res.network_requests, 1u + 4u);  // one country page, four data pages
}

TEST(WdiClient, ShortPaginationIsNetworkFailure) {
  MockWdi mock;
  mock.overstate_total = 1;
  TempDir dir;
  WdiClient client(config_for(mock, dir, 4));
  EXPECT_EQ(code_of([&] { client.fetch({"TEST.IND", false}); }), ErrorCode::NetworkFailure);
}

TEST(WdiClient, RetriesServerErrors) {
  MockWdi mock;
  mock.fail_next = 2;
  TempDir dir;
  WdiClient client(config_for(mock, dir));
  auto res = client.fetch({"TEST.IND", false});
  EXPECT_EQ(res.dataset.row_count(), 15u);
  EXPECT_EQ(res.network_requests, 4u);
}

TEST(WdiClient, UnknownIndicator) {
  MockWdi mock;
  TempDir dir;
  WdiClient client(config_for(mock, dir));
  EXPECT_EQ(code_of([&] { client.fetch({"NOT.A.CODE", false}); }), ErrorCode::UnknownIndicator);
  EXPECT_FALSE(client.cache().contains("NOT.A.CODE"));
}

TEST(WdiClient, UnreachableWithoutCacheFails) {
  TempDir dir;
  ClientConfig cfg;
  {
    MockWdi mock;
    cfg = config_for(mock, dir);
  }
  cfg.max_retries = 1;
  WdiClient client(cfg);
  EXPECT_EQ(code_of([&] { client.fetch({"TEST.IND", false}); }), ErrorCode::NetworkFailure);
}

TEST(WdiClient, UnreachableFallsBackToCache) {
  TempDir dir;
  ClientConfig cfg;
  {
    MockWdi mock;
    cfg = config_for(mock, dir);
    WdiClient(cfg).fetch({"TEST.IND", false});
  }
  cfg.max_retries = 0;
  auto res = WdiClient(cfg).fetch({"TEST.IND", true});
  EXPECT_TRUE(res.cache_hit);
  EXPECT_EQ(res.dataset.row_count(), 15u);
}

TEST(WdiClient, CorruptCacheIsReported) {
  MockWdi mock;
  TempDir dir;
  WdiClient client(config_for(mock, dir));
  auto res = client.fetch({"TEST.IND", false});
  {
    std::ofstream out(res.cache_path, std::ios::trunc);
    out << "country,year\nAlbania,2015\n";
  }
  EXPECT_EQ(code_of([&] { client.fetch({"TEST.IND", false}); }), ErrorCode::CacheCorrupt);
}

TEST(WdiClient, Search) {
  MockWdi mock;
  TempDir dir;
  WdiClient client(config_for(mock, dir, 2));
  auto hits = client.search("pm2.5");
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].code, "EN.ATM.PM25.MC.M3");
  EXPECT_EQ(client.search("POPULATION").size(), 2u);
  EXPECT_TRUE(client.search("zzzz").empty());
  EXPECT_EQ(code_of([&] { client.search(""); }), ErrorCode::InvalidArgument);
}

TEST(WdiClient, RejectsMalformedCode) {
  MockWdi mock;
  TempDir dir;
  WdiClient client(config_for(mock, dir));
  EXPECT_EQ(code_of([&] { client.fetch({"bad code", false}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(mock.hits, 0);
}
