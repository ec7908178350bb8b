#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wdix/dataset.hpp"

namespace wdix::testing {

inline constexpr double NA = std::numeric_limits<double>::quiet_NaN();

struct SyntheticCountry {
  std::string name;
  std::string region = "Europe & Central Asia";
  std::string income = "High income";
  std::string lending = "Not classified";
  std::vector<double> values;  // NaN marks a missing cell
};

inline std::string iso3_for(std::size_t i) {
  std::string s = "AAA";
  s[2] = static_cast<char>('A' + i % 26);
  s[1] = static_cast<char>('A' + (i / 26) % 26);
  s[0] = static_cast<char>('A' + (i / 676) % 26);
  return s;
}

inline IndicatorDataset make_dataset(const std::vector<SyntheticCountry>& countries,
                                     int first_year, std::string code = "TEST.IND") {
  IndicatorDataset ds;
  ds.indicator_code = std::move(code);
  for (std::size_t i = 0; i < countries.size(); ++i) {
    const auto& c = countries[i];
    const auto iso3 = iso3_for(i);
    for (std::size_t k = 0; k < c.values.size(); ++k) {
      Record r;
      r.country = c.name;
      r.iso2c = iso3.substr(0, 2);
      r.iso3c = iso3;
      r.year = first_year + static_cast<int>(k);
      if (!std::isnan(c.values[k])) r.value = c.values[k];
      r.lastupdated = "2025-07-01";
      r.region = c.region;
      r.capital = "Capital " + c.name;
      r.longitude = "1.5";
      r.latitude = "-2.25";
      r.income = c.income;
      r.lending = c.lending;
      ds.rows.push_back(std::move(r));
    }
  }
  normalize(ds);
  return ds;
}

inline std::vector<double> random_walk(std::mt19937_64& rng, std::size_t n, double start = 50.0) {
  std::normal_distribution<double> step(0.0, 1.0);
  std::vector<double> y(n);
  double v = start;
  for (auto& x : y) x = (v += step(rng));
  return y;
}

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("wdix-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace wdix::testing
