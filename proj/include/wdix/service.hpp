#pragma once

// Read-only JSON API over the indicator cache:
//
//   GET /api/v1/indicators/{code}/series
//   GET /api/v1/indicators/{code}/diagnostics?group=&metrics=
//   GET /api/v1/indicators/{code}/missingness?group=
//   GET /api/v1/indicators/{code}/highlights?metric=&percentile=&group=&absolute=
//   GET /api/v1/indicators/{code}/groups
//
// Every response is an envelope {api_version, indicator_code, generated_at,
// payload_kind, payload}; failures add an "error" object and carry a null payload.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "wdix/clock.hpp"
#include "wdix/diagnostics.hpp"
#include "wdix/error.hpp"
#include "wdix/pipeline.hpp"
#include "wdix/wdi_client.hpp"

namespace wdix::service {

inline constexpr std::string_view kApiVersion = "v1";
inline constexpr std::string_view kApiPrefix = "/api/v1";

enum class PayloadKind { Series, Diagnostics, Missingness, Highlights, Groups };

constexpr std::string_view to_string(PayloadKind k) {
  switch (k) {
    case PayloadKind::Series: return "series";
    case PayloadKind::Diagnostics: return "diagnostics";
    case PayloadKind::Missingness: return "missingness";
    case PayloadKind::Highlights: return "highlights";
    case PayloadKind::Groups: return "groups";
  }
  return "";
}

/// Non-decreasing timestamps within the process.
inline std::string monotone_timestamp() {
  static std::mutex m;
  static std::chrono::system_clock::time_point last{};
  std::lock_guard lock(m);
  auto now = std::chrono::system_clock::now();
  if (now < last) now = last;
  last = now;
  return format_utc(now);
}

inline nlohmann::json envelope(std::string_view code, PayloadKind kind, nlohmann::json payload) {
  return {{"api_version", std::string(kApiVersion)},
          {"indicator_code", std::string(code)},
          {"generated_at", monotone_timestamp()},
          {"payload_kind", std::string(to_string(kind))},
          {"payload", std::move(payload)}};
}

inline nlohmann::json error_envelope(std::string_view code, PayloadKind kind, const Error& e) {
  auto j = envelope(code, kind, nullptr);
  j["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  return j;
}

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::CacheCorrupt:
    case ErrorCode::IoFailure:
      return 500;
    case ErrorCode::UnknownIndicator:
    case ErrorCode::UnknownCountry:
      return 404;
    default:
      return 400;
  }
}

// ---------------------------------------------------------------------------
// Payload builders (pure)
// ---------------------------------------------------------------------------

inline nlohmann::json optional_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

inline nlohmann::json series_payload(const Analysis& a) {
  const auto& p = a.valid.panel;
  nlohmann::json countries = nlohmann::json::array();
  for (std::size_t i = 0; i < p.country_count(); ++i) {
    nlohmann::json values = nlohmann::json::array();
    for (std::size_t k = 0; k < p.year_count(); ++k) values.push_back(optional_number(p.value(i, k)));
    nlohmann::json c = {{"country", p.countries[i]}, {"iso3c", p.info[i].iso3c}};
    for (auto g : kGroupVars) c[std::string(to_string(g))] = p.labels(g)[i];
    c["values"] = std::move(values);
    countries.push_back(std::move(c));
  }
  return {{"index_name", p.index_name}, {"years", p.years}, {"countries", std::move(countries)}};
}

inline nlohmann::json diagnostics_payload(const Analysis& a, const std::vector<Metric>& metrics) {
  std::vector<Metric> selected = metrics;
  if (selected.empty()) selected.assign(kMetrics.begin(), kMetrics.end());
  const auto norm = normalize_metrics(a.records, selected, a.group);
  auto rows = [](const std::vector<std::vector<std::optional<double>>>& m) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : m) {
      nlohmann::json r = nlohmann::json::array();
      for (const auto& v : row) r.push_back(optional_number(v));
      out.push_back(std::move(r));
    }
    return out;
  };
  std::vector<std::string> names;
  for (auto m : selected) names.emplace_back(to_string(m));
  return {{"group", a.group ? nlohmann::json(std::string(to_string(*a.group))) : nlohmann::json()},
          {"records", to_json(a.records)},
          {"parallel",
           {{"metrics", names}, {"global", rows(norm.global)}, {"within_group", rows(norm.within_group)}}}};
}

inline nlohmann::json missingness_payload(const IndicatorDataset& ds, GroupVar g) {
  const auto summary = missingness_summary(ds, g);
  const auto grid = missingness_grid(ds, g);
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : summary.entries) {
    entries.push_back({{"country", e.country},
                       {"group", e.group_label},
                       {"n_miss", e.n_miss},
                       {"pct_miss", e.pct_miss}});
  }
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t i = 0; i < grid.countries.size(); ++i) {
    std::vector<bool> row(grid.present.begin() + i * grid.years.size(),
                          grid.present.begin() + (i + 1) * grid.years.size());
    cells.push_back({{"country", grid.countries[i]}, {"group", grid.labels[i]}, {"present", row}});
  }
  return {{"group", std::string(to_string(g))},
          {"years", grid.years},
          {"overall_pct_missing", grid.overall_pct_missing},
          {"overall_pct_present", grid.overall_pct_present},
          {"summary", std::move(entries)},
          {"grid", std::move(cells)}};
}

inline nlohmann::json highlights_payload(const Analysis& a, const HighlightOptions& opt) {
  const auto h = highlight_threshold(a.records, opt);
  auto j = to_json(h);
  nlohmann::json values = nlohmann::json::object();
  for (const auto& r : a.records) {
    if (h.contains(r.country)) values[r.country] = optional_number(r.get(opt.metric));
  }
  j["values"] = std::move(values);
  return j;
}

inline nlohmann::json groups_payload(const Analysis& a) {
  const auto& p = a.valid.panel;
  nlohmann::json vars = nlohmann::json::array();
  for (auto g : kGroupVars) {
    nlohmann::json members = nlohmann::json::object();
    for (std::size_t i = 0; i < p.country_count(); ++i) members[p.countries[i]] = p.labels(g)[i];
    vars.push_back({{"name", std::string(to_string(g))},
                    {"levels", p.group_variable(g).levels},
                    {"members", std::move(members)}});
  }
  return {{"group_vars", std::move(vars)}};
}

inline nlohmann::json empty_payload(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::Series:
      return {{"years", nlohmann::json::array()}, {"countries", nlohmann::json::array()}};
    case PayloadKind::Diagnostics:
      return {{"records", nlohmann::json::array()}};
    case PayloadKind::Missingness:
      return {{"summary", nlohmann::json::array()}, {"grid", nlohmann::json::array()}};
    case PayloadKind::Highlights:
      return {{"thresholds", nlohmann::json::object()}, {"highlighted", nlohmann::json::array()}};
    case PayloadKind::Groups:
      return {{"group_vars", nlohmann::json::array()}};
  }
  return nlohmann::json::object();
}

// ---------------------------------------------------------------------------
// DataService: cache-backed, memoised per (code, group)
// ---------------------------------------------------------------------------

struct Query {
  std::optional<GroupVar> group;
  std::vector<Metric> metrics;
  std::optional<Metric> metric;
  double percentile = 0.95;
  bool absolute = false;
};

inline std::vector<Metric> parse_metric_list(std::string_view list) {
  std::vector<Metric> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    auto item = list.substr(start, end - start);
    if (!item.empty()) out.push_back(parse_metric(item));
    start = end + 1;
  }
  return out;
}

inline double parse_percentile(std::string_view text) {
  auto v = parse_double(text);
  if (!v || !(*v > 0.0 && *v < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "percentile must be a number in (0, 1)");
  }
  return *v;
}

class DataService {
 public:
  explicit DataService(std::filesystem::path data_dir) : cache_(std::move(data_dir)) {}

  const CacheStore& cache() const { return cache_; }

  /// Builds the envelope for one endpoint. Returns the HTTP status alongside.
  std::pair<int, nlohmann::json> handle(std::string_view code, PayloadKind kind, const Query& q) {
    try {
      if (!is_valid_indicator_code(code)) {
        throw Error(ErrorCode::InvalidArgument, "malformed indicator code");
      }
      if (!cache_.contains(std::string(code))) {
        throw Error(ErrorCode::UnknownIndicator, std::string(code) + " is not cached");
      }
      if (kind == PayloadKind::Highlights && !q.metric) {
        throw Error(ErrorCode::UnknownMetric, "metric query parameter is required");
      }
      std::shared_ptr<const Analysis> a;
      try {
        a = analysis(std::string(code), q.group);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyPanel) throw;
        return {200, envelope(code, kind, empty_payload(kind))};
      }
      return {200, envelope(code, kind, build(*a, kind, q))};
    } catch (const Error& e) {
      return {http_status(e.code()), error_envelope(code, kind, e)};
    }
  }

  std::shared_ptr<const Analysis> analysis(const std::string& code, std::optional<GroupVar> group) {
    const std::string key = code + "|" + (group ? std::string(to_string(*group)) : std::string("-"));
    {
      std::shared_lock read(memo_mutex_);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    auto fresh = std::make_shared<const Analysis>(analyse(cache_.load(code), group));
    std::unique_lock write(memo_mutex_);
    auto [it, inserted] = memo_.emplace(key, std::move(fresh));
    return it->second;
  }

 private:
  nlohmann::json build(const Analysis& a, PayloadKind kind, const Query& q) const {
    switch (kind) {
      case PayloadKind::Series: return series_payload(a);
      case PayloadKind::Diagnostics: return diagnostics_payload(a, q.metrics);
      case PayloadKind::Missingness:
        return missingness_payload(a.dataset, q.group.value_or(GroupVar::Region));
      case PayloadKind::Highlights:
        return highlights_payload(a, {*q.metric, q.percentile, q.group, q.absolute});
      case PayloadKind::Groups: return groups_payload(a);
    }
    return nullptr;
  }

  CacheStore cache_;
  std::shared_mutex memo_mutex_;
  std::map<std::string, std::shared_ptr<const Analysis>> memo_;
};

// ---------------------------------------------------------------------------
// HTTP transport
// ---------------------------------------------------------------------------

struct ServerConfig {
  std::filesystem::path data_dir = "wdi_data";
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string cors_origin = "*";
};

inline Query parse_query(const httplib::Request& req) {
  Query q;
  if (req.has_param("group") && !req.get_param_value("group").empty()) {
    q.group = parse_group_var(req.get_param_value("group"));
  }
  if (req.has_param("metrics")) q.metrics = parse_metric_list(req.get_param_value("metrics"));
  if (req.has_param("metric")) q.metric = parse_metric(req.get_param_value("metric"));
  if (req.has_param("percentile")) q.percentile = parse_percentile(req.get_param_value("percentile"));
  if (req.has_param("absolute")) {
    const auto v = req.get_param_value("absolute");
    q.absolute = v == "1" || v == "true";
  }
  return q;
}

class HttpServer {
 public:
  explicit HttpServer(ServerConfig config)
      : config_(std::move(config)), service_(config_.data_dir) {
    if (!std::filesystem::is_directory(config_.data_dir)) {
      throw Error(ErrorCode::DataDirMissing, config_.data_dir.string());
    }
    routes();
  }

  ~HttpServer() { stop(); }

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the socket; returns the bound port.
  int bind() {
    if (config_.port == 0) {
      port_ = server_.bind_to_any_port(config_.host);
    } else {
      port_ = server_.bind_to_port(config_.host, config_.port) ? config_.port : -1;
    }
    if (port_ < 0) {
      throw Error(ErrorCode::PortInUse, config_.host + ":" + std::to_string(config_.port));
    }
    return port_;
  }

  /// Blocks serving requests until stop().
  void listen() { server_.listen_after_bind(); }

  /// Binds and serves on a background thread.
  int start() {
    const int port = bind();
    thread_ = std::thread([this] { listen(); });
    server_.wait_until_ready();
    return port;
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }
  DataService& service() { return service_; }

 private:
  void routes() {
    // SO_REUSEADDR only, no SO_REUSEPORT.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    server_.set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin},
                                 {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                                 {"Access-Control-Allow-Headers", "Content-Type"}});
    server_.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });

    const std::pair<const char*, PayloadKind> endpoints[] = {
        {"series", PayloadKind::Series},
        {"diagnostics", PayloadKind::Diagnostics},
        {"missingness", PayloadKind::Missingness},
        {"highlights", PayloadKind::Highlights},
        {"groups", PayloadKind::Groups}};
    for (const auto& [name, kind] : endpoints) {
      const std::string pattern =
          std::string(kApiPrefix) + R"(/indicators/([^/]+)/)" + name;
      server_.Get(pattern, [this, kind = kind](const httplib::Request& req,
                                               httplib::Response& res) {
        const std::string code = req.matches[1];
        int status = 200;
        nlohmann::json body;
        try {
          std::tie(status, body) = service_.handle(code, kind, parse_query(req));
        } catch (const Error& e) {
          status = http_status(e.code());
          body = error_envelope(code, kind, e);
        }
        res.status = status;
        res.set_content(body.dump(), "application/json; charset=utf-8");
      });
    }
  }

  ServerConfig config_;
  DataService service_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace wdix::service
