#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "wdix/clock.hpp"
#include "wdix/dataset.hpp"
#include "wdix/error.hpp"

namespace wdix {

namespace fs = std::filesystem;

struct ClientConfig {
  std::string api_base = "https://api.worldbank.org";
  fs::path data_dir = "wdi_data";
  int per_page = 20000;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{60};
};

// ---------------------------------------------------------------------------
// Local cache: <data_dir>/<code>.csv plus <code>.meta.json
// ---------------------------------------------------------------------------

struct CacheMeta {
  std::string indicator_code;
  std::string fetched_at;
  std::size_t row_count = 0;
};

class CacheStore {
 public:
  explicit CacheStore(fs::path data_dir) : dir_(std::move(data_dir)) {}

  const fs::path& dir() const { return dir_; }
  fs::path csv_path(const std::string& code) const { return dir_ / (code + ".csv"); }
  fs::path meta_path(const std::string& code) const { return dir_ / (code + ".meta.json"); }

  bool contains(const std::string& code) const { return fs::exists(csv_path(code)); }

  /// Loads and schema-checks a cached indicator. Throws CacheCorrupt on any violation.
  IndicatorDataset load(const std::string& code) const {
    auto lock = lock_for(code);
    std::ifstream in(csv_path(code), std::ios::binary);
    if (!in) throw Error(ErrorCode::CacheCorrupt, "cannot open " + csv_path(code).string());
    std::stringstream buf;
    buf << in.rdbuf();

    IndicatorDataset ds;
    try {
      ds = from_csv(buf.str());
    } catch (const Error& e) {
      throw Error(ErrorCode::CacheCorrupt, csv_path(code).string() + ": " + e.what());
    }
    if (ds.indicator_code != code) {
      throw Error(ErrorCode::CacheCorrupt, csv_path(code).string() + ": value column is '" +
                                               ds.indicator_code + "', expected '" + code + "'");
    }
    if (auto meta = read_meta(code); meta && meta->row_count != ds.row_count()) {
      throw Error(ErrorCode::CacheCorrupt,
                  "row count " + std::to_string(ds.row_count()) + " disagrees with " +
                      meta_path(code).string() + " (" + std::to_string(meta->row_count) + ")");
    }
    return ds;
  }

  std::optional<CacheMeta> read_meta(const std::string& code) const {
    std::ifstream in(meta_path(code));
    if (!in) return std::nullopt;
    try {
      auto j = nlohmann::json::parse(in);
      return CacheMeta{j.at("indicator_code").get<std::string>(),
                       j.at("fetched_at").get<std::string>(),
                       j.at("row_count").get<std::size_t>()};
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::CacheCorrupt, meta_path(code).string() + ": " + e.what());
    }
  }

  /// Writes csv and sidecar through temporary files renamed into place.
  void store(const IndicatorDataset& ds) const {
    auto lock = lock_for(ds.indicator_code);
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir_.string() + ": " + ec.message());

    nlohmann::json meta = {{"indicator_code", ds.indicator_code},
                           {"fetched_at", utc_now()},
                           {"row_count", ds.row_count()}};
    write_atomically(csv_path(ds.indicator_code), to_csv(ds));
    write_atomically(meta_path(ds.indicator_code), meta.dump(2) + "\n");
  }

 private:
  static void write_atomically(const fs::path& target, const std::string& content) {
    fs::path tmp = target;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
      out << content;
      if (!out.flush()) throw Error(ErrorCode::IoFailure, "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot rename into " + target.string());
  }

  // One writer per cache file within the process.
  std::unique_lock<std::mutex> lock_for(const std::string& code) const {
    static std::mutex registry_mutex;
    static std::map<std::string, std::unique_ptr<std::mutex>> locks;
    std::mutex* m = nullptr;
    {
      std::lock_guard guard(registry_mutex);
      auto key = fs::weakly_canonical(dir_).string() + "/" + code;
      auto& slot = locks[key];
      if (!slot) slot = std::make_unique<std::mutex>();
      m = slot.get();
    }
    return std::unique_lock(*m);
  }

  fs::path dir_;
};

// ---------------------------------------------------------------------------
// HTTP client for the World Bank v2 JSON API
// ---------------------------------------------------------------------------

struct FetchResult {
  IndicatorDataset dataset;
  fs::path cache_path;
  bool cache_hit = false;
  std::size_t network_requests = 0;
  std::vector<std::string> countries_missing_iso;
};

struct IndicatorInfo {
  std::string code;
  std::string name;

  friend bool operator==(const IndicatorInfo&, const IndicatorInfo&) = default;
};

namespace detail {

struct BaseUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

inline BaseUrl split_base(const std::string& base) {
  auto scheme_end = base.find("://");
  auto path_start = base.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  BaseUrl out;
  out.origin = base.substr(0, path_start);
  if (path_start != std::string::npos) out.prefix = base.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

inline long json_int(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_string()) return std::stol(v.get<std::string>());
  return v.get<long>();
}

inline std::string json_str(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

inline std::string nested_value(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_object()) return {};
  return json_str(*it, "value");
}

// The API reports errors as [{"message":[{"id":..,"key":..,"value":..}]}].
inline std::optional<std::string> api_error_message(const nlohmann::json& body) {
  if (!body.is_array() || body.empty() || !body[0].is_object()) return std::nullopt;
  auto it = body[0].find("message");
  if (it == body[0].end()) return std::nullopt;
  std::string text;
  for (const auto& m : *it) {
    if (!text.empty()) text += "; ";
    text += json_str(m, "key");
    auto value = json_str(m, "value");
    if (!value.empty()) text += ": " + value;
  }
  return text.empty() ? std::string("API error") : text;
}

struct CountryMeta {
  std::string iso2c;
  std::string region;
  std::string capital;
  std::string longitude;
  std::string latitude;
  std::string income;
  std::string lending;
};

}  // namespace detail

class WdiClient {
 public:
  explicit WdiClient(ClientConfig config) : config_(std::move(config)), cache_(config_.data_dir) {}

  const ClientConfig& config() const { return config_; }
  const CacheStore& cache() const { return cache_; }

  /// Returns the cached dataset unless `refresh` is set or no cache exists; otherwise
  /// downloads every page, joins country metadata, and rewrites the cache. A transport
  /// failure falls back to a readable cache before surfacing NetworkFailure.
  FetchResult fetch(const IndicatorRequest& req) {
    req.validate();
    const auto& code = req.indicator_code;
    FetchResult result;
    result.cache_path = cache_.csv_path(code);

    if (!req.refresh && cache_.contains(code)) {
      result.dataset = cache_.load(code);
      result.cache_hit = true;
      result.countries_missing_iso = rows_missing_iso(result.dataset);
      return result;
    }

    requests_ = 0;
    try {
      result.dataset = download(code);
    } catch (const Error& e) {
      result.network_requests = requests_;
      if (e.code() == ErrorCode::NetworkFailure && cache_.contains(code)) {
        result.dataset = cache_.load(code);
        result.cache_hit = true;
        result.countries_missing_iso = rows_missing_iso(result.dataset);
        return result;
      }
      throw;
    }
    result.network_requests = requests_;
    cache_.store(result.dataset);
    result.countries_missing_iso = rows_missing_iso(result.dataset);
    return result;
  }

  /// Case-insensitive substring match on indicator name or code, in API order.
  std::vector<IndicatorInfo> search(const std::string& keyword) {
    if (keyword.empty()) throw Error(ErrorCode::InvalidArgument, "search keyword is empty");
    const auto needle = lower(keyword);
    std::vector<IndicatorInfo> matches;
    for_each_page("/v2/indicator", [&](const nlohmann::json& entry) {
      IndicatorInfo info{detail::json_str(entry, "id"), detail::json_str(entry, "name")};
      if (lower(info.name).find(needle) != std::string::npos ||
          lower(info.code).find(needle) != std::string::npos) {
        matches.push_back(std::move(info));
      }
    });
    return matches;
  }

  std::size_t last_request_count() const { return requests_; }

 private:
  static std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
  }

  IndicatorDataset download(const std::string& code) {
    std::unordered_map<std::string, detail::CountryMeta> by_iso3;
    std::unordered_map<std::string, detail::CountryMeta> by_iso2;
    for_each_page("/v2/country", [&](const nlohmann::json& c) {
      detail::CountryMeta m;
      m.iso2c = detail::json_str(c, "iso2Code");
      m.region = detail::nested_value(c, "region");
      m.capital = detail::json_str(c, "capitalCity");
      m.longitude = detail::json_str(c, "longitude");
      m.latitude = detail::json_str(c, "latitude");
      m.income = detail::nested_value(c, "incomeLevel");
      m.lending = detail::nested_value(c, "lendingType");
      auto iso3 = detail::json_str(c, "id");
      if (!m.iso2c.empty()) by_iso2[m.iso2c] = m;
      if (!iso3.empty()) by_iso3[iso3] = std::move(m);
    });

    IndicatorDataset ds;
    ds.indicator_code = code;
    std::string lastupdated;
    for_each_page(
        "/v2/country/all/indicator/" + code,
        [&](const nlohmann::json& obs) {
          Record r;
          r.country = detail::nested_value(obs, "country");
          if (auto it = obs.find("country"); it != obs.end() && it->is_object()) {
            r.iso2c = detail::json_str(*it, "id");
          }
          r.iso3c = detail::json_str(obs, "countryiso3code");
          auto year = parse_int(detail::json_str(obs, "date"));
          if (!year) return;  // sub-annual periods are outside the panel model
          r.year = *year;
          if (auto v = obs.find("value"); v != obs.end() && v->is_number()) {
            r.value = v->get<double>();
          }
          r.status = detail::json_str(obs, "obs_status");
          r.lastupdated = lastupdated;
          const detail::CountryMeta* meta = nullptr;
          if (auto it = by_iso3.find(r.iso3c); !r.iso3c.empty() && it != by_iso3.end()) {
            meta = &it->second;
          } else if (auto it2 = by_iso2.find(r.iso2c); !r.iso2c.empty() && it2 != by_iso2.end()) {
            meta = &it2->second;
          }
          if (meta) {
            r.region = meta->region;
            r.capital = meta->capital;
            r.longitude = meta->longitude;
            r.latitude = meta->latitude;
            r.income = meta->income;
            r.lending = meta->lending;
          }
          ds.rows.push_back(std::move(r));
        },
        [&](const nlohmann::json& header) { lastupdated = detail::json_str(header, "lastupdated"); });
    normalize(ds);
    return ds;
  }

  // Walks every page of a paginated endpoint, checking the entry total against the
  // header's declared total.
  void for_each_page(const std::string& path,
                     const std::function<void(const nlohmann::json&)>& on_entry,
                     const std::function<void(const nlohmann::json&)>& on_header = {}) {
    long pages = 1;
    long declared_total = -1;
    long seen = 0;
    for (long page = 1; page <= pages; ++page) {
      auto body = get_json(path, page);
      if (auto msg = detail::api_error_message(body)) {
        throw Error(ErrorCode::UnknownIndicator, path + ": " + *msg);
      }
      if (!body.is_array() || body.size() < 2 || !body[0].is_object()) {
        throw Error(ErrorCode::NetworkFailure, path + ": unexpected response shape");
      }
      try {
        pages = detail::json_int(body[0], "pages");
        declared_total = detail::json_int(body[0], "total");
      } catch (const std::exception& e) {
        throw Error(ErrorCode::NetworkFailure, path + ": malformed page header: " + e.what());
      }
      if (on_header && page == 1) on_header(body[0]);
      if (body[1].is_array()) {
        for (const auto& entry : body[1]) {
          on_entry(entry);
          ++seen;
        }
      }
    }
    if (declared_total >= 0 && seen != declared_total) {
      throw Error(ErrorCode::NetworkFailure, path + ": received " + std::to_string(seen) +
                                                 " entries, server declared " +
                                                 std::to_string(declared_total));
    }
  }

  nlohmann::json get_json(const std::string& path, long page) {
    const auto base = detail::split_base(config_.api_base);
    const std::string target = base.prefix + path + "?format=json&per_page=" +
                               std::to_string(config_.per_page) + "&page=" + std::to_string(page);

    auto backoff = config_.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
      httplib::Client cli(base.origin);
      cli.set_follow_location(true);
      cli.set_connection_timeout(config_.timeout);
      cli.set_read_timeout(config_.timeout);
      ++requests_;
      auto res = cli.Get(target);
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500 || res->status == 429) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception&) {
        if (res->status >= 400) {
          throw Error(ErrorCode::UnknownIndicator, path + ": HTTP " + std::to_string(res->status));
        }
        throw Error(ErrorCode::NetworkFailure, path + ": response is not JSON");
      }
      if (res->status >= 400 && !detail::api_error_message(body)) {
        throw Error(ErrorCode::UnknownIndicator, path + ": HTTP " + std::to_string(res->status));
      }
      return body;
    }
    throw Error(ErrorCode::NetworkFailure,
                config_.api_base + target + " failed after " +
                    std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
  }

  ClientConfig config_;
  CacheStore cache_;
  std::size_t requests_ = 0;
};

}  // namespace wdix
