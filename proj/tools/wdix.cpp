// wdix: fetch World Bank indicators, validate panels, compute diagnostic indices,
// export static plots and serve the JSON API.
//
// Exit codes: 0 success, 1 user error, 2 I/O or network failure.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "wdix/wdix.hpp"

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::optional<std::string> data_dir;
  std::optional<std::string> api_base;
  std::optional<std::string> config;
};

struct SourceOptions {
  std::string code;
  std::optional<std::string> input;  // arbitrary 13-column CSV instead of the cache
  std::optional<std::string> index;
};

std::string thousands(std::size_t n) {
  std::string s = std::to_string(n);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

wdix::Settings load_settings(const GlobalOptions& g) {
  if (g.config) return wdix::Settings::from_file(*g.config, true);
  return wdix::Settings::from_file(std::string(wdix::kDefaultConfigFile), false);
}

wdix::ClientConfig client_config(const GlobalOptions& g) {
  const auto settings = load_settings(g);
  wdix::ClientConfig cfg;
  cfg.data_dir = settings.resolve("data_dir", g.data_dir, "wdi_data");
  cfg.api_base = settings.resolve("api_base", g.api_base, cfg.api_base);
  return cfg;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw wdix::Error(wdix::ErrorCode::IoFailure, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content)) throw wdix::Error(wdix::ErrorCode::IoFailure, "cannot write " + path.string());
}

wdix::IndicatorDataset load_source(const GlobalOptions& g, const SourceOptions& s) {
  if (s.input) {
    try {
      return wdix::from_csv(read_file(*s.input), s.index.value_or(""));
    } catch (const wdix::Error& e) {
      if (e.code() == wdix::ErrorCode::IoFailure) throw;
      throw wdix::Error(wdix::ErrorCode::SchemaMismatch, *s.input + ": " + e.what());
    }
  }
  if (s.code.empty()) throw wdix::Error(wdix::ErrorCode::InvalidArgument, "an indicator code or --input is required");
  wdix::WdiClient client(client_config(g));
  return client.fetch({s.code, false}).dataset;
}

std::optional<wdix::GroupVar> group_option(const std::string& name) {
  if (name.empty() || name == "none") return std::nullopt;
  return wdix::parse_group_var(name);
}

void add_source_options(CLI::App* cmd, SourceOptions& s) {
  cmd->add_option("code", s.code, "World Bank indicator code");
  cmd->add_option("--input", s.input, "13-column panel CSV to use instead of the cache");
  cmd->add_option("--index", s.index, "Index variable name for --input (defaults to its value column header)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wdix - diagnostic indices for country-level panel data"};
  app.require_subcommand(1);
  GlobalOptions global;
  app.add_option("--data-dir", global.data_dir, "Cache directory (default wdi_data)");
  app.add_option("--api-base", global.api_base, "World Bank API base URL");
  app.add_option("--config", global.config, "JSON config file (default ./wdix.json if present)");

  // fetch
  std::string fetch_code;
  bool refresh = false;
  auto* fetch = app.add_subcommand("fetch", "Download an indicator into the local cache");
  fetch->add_option("code", fetch_code, "World Bank indicator code")->required();
  fetch->add_flag("--refresh", refresh, "Ignore the cache and download again");

  // search
  std::string keyword;
  auto* search = app.add_subcommand("search", "Find indicator codes by keyword");
  search->add_option("keyword", keyword, "Search keyword")->required();

  // validate
  SourceOptions validate_src;
  std::string validate_group = "region";
  auto* validate = app.add_subcommand("validate", "Report excluded countries/years and missingness");
  add_source_options(validate, validate_src);
  validate->add_option("--group-var", validate_group, "region, income or lending");

  // diagnose
  SourceOptions diag_src;
  std::string diag_group;
  std::string diag_format = "csv";
  std::optional<std::string> diag_output;
  auto* diagnose = app.add_subcommand("diagnose", "Compute the ten diagnostic indices");
  add_source_options(diagnose, diag_src);
  diagnose->add_option("--group-var", diag_group, "region, income or lending (omit for one group)");
  diagnose->add_option("--out", diag_format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  diagnose->add_option("-o,--output", diag_output, "Output file (default <code>_diagnostics.<fmt>)");

  // highlights
  SourceOptions hl_src;
  std::string hl_group;
  std::string hl_metric;
  double hl_percentile = 0.95;
  bool hl_absolute = false;
  auto* highlights = app.add_subcommand("highlights", "Countries above a metric percentile");
  add_source_options(highlights, hl_src);
  highlights->add_option("--metric", hl_metric, "Metric name")->required();
  highlights->add_option("--percentile", hl_percentile, "Quantile in (0,1)");
  highlights->add_option("--group-var", hl_group, "Threshold within each level of this variable");
  highlights->add_flag("--absolute", hl_absolute, "Rank on absolute metric values");

  // export-plots
  SourceOptions plot_src;
  std::string plot_kind;
  std::string plot_group = "region";
  std::string plot_metric;
  std::optional<std::string> plot_output;
  auto* export_plots = app.add_subcommand("export-plots", "Write a static SVG plot");
  add_source_options(export_plots, plot_src);
  export_plots->add_option("--plot", plot_kind, "distribution, partition or missingness")->required();
  export_plots->add_option("--group-var", plot_group, "Grouping variable");
  export_plots->add_option("--metric", plot_metric, "Metric (comma list for distribution)");
  export_plots->add_option("-o,--output", plot_output, "Output file (default <code>_<plot>.svg)");

  // serve
  std::optional<std::string> port_flag;
  std::optional<std::string> host_flag;
  std::optional<std::string> cors_flag;
  auto* serve = app.add_subcommand("serve", "Serve the read-only JSON API");
  serve->add_option("--port", port_flag, "TCP port (default 8080)");
  serve->add_option("--host", host_flag, "Bind address (default 127.0.0.1)");
  serve->add_option("--cors-origin", cors_flag, "Allowed UI origin (default *)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*fetch) {
      wdix::WdiClient client(client_config(global));
      auto res = client.fetch({fetch_code, refresh});
      std::cout << fetch_code << ": " << thousands(res.dataset.row_count()) << " rows × "
                << wdix::IndicatorDataset::column_count() << " cols -> " << res.cache_path.string()
                << (res.cache_hit ? " (cache hit)" : " (downloaded, " +
                                                         std::to_string(res.network_requests) +
                                                         " requests)")
                << "\n";
      if (!res.countries_missing_iso.empty()) {
        std::cout << res.countries_missing_iso.size() << " entities lack ISO codes:";
        for (const auto& c : res.countries_missing_iso) std::cout << " [" << c << "]";
        std::cout << "\n";
      }
    } else if (*search) {
      wdix::WdiClient client(client_config(global));
      for (const auto& info : client.search(keyword)) std::cout << info.code << "\t" << info.name << "\n";
    } else if (*validate) {
      const auto ds = load_source(global, validate_src);
      const auto g = wdix::parse_group_var(validate_group);
      const auto valid = wdix::get_valid_data(ds);
      std::cout << wdix::format_exclusion_report(valid.report);
      const auto summary = wdix::missingness_summary(ds, g);
      std::printf("Missing %.2f%%, present %.2f%% over %d-%d\n", summary.overall_pct_missing,
                  summary.overall_pct_present, summary.first_year, summary.last_year);
      std::printf("%-40s %-32s %6s %8s\n", "country", std::string(wdix::to_string(g)).c_str(), "n_miss", "pct_miss");
      for (const auto& e : summary.entries) {
        std::printf("%-40s %-32s %6d %8.2f\n", e.country.c_str(), e.group_label.c_str(), e.n_miss, e.pct_miss);
      }
    } else if (*diagnose) {
      const auto ds = load_source(global, diag_src);
      const auto analysis = wdix::analyse(ds, group_option(diag_group));
      std::cout << wdix::format_exclusion_report(analysis.valid.report);
      const std::string content = diag_format == "json"
                                      ? wdix::to_json(analysis.records).dump(2) + "\n"
                                      : wdix::to_csv(analysis.records);
      const fs::path out = diag_output.value_or(ds.indicator_code + "_diagnostics." + diag_format);
      write_file(out, content);
      std::cout << "Wrote " << analysis.records.size() << " records x " << wdix::kMetricCount
                << " metrics to " << out.string() << "\n";
    } else if (*highlights) {
      const auto ds = load_source(global, hl_src);
      const auto group = group_option(hl_group);
      const auto analysis = wdix::analyse(ds, group);
      const auto h = wdix::highlight_threshold(
          analysis.records, {wdix::parse_metric(hl_metric), hl_percentile, group, hl_absolute});
      std::cout << wdix::to_json(h).dump(2) << "\n";
    } else if (*export_plots) {
      const auto kind = wdix::plots::parse_plot_kind(plot_kind);
      const auto ds = load_source(global, plot_src);
      const auto group = wdix::parse_group_var(plot_group);
      std::string svg;
      if (kind == wdix::plots::PlotKind::Missingness) {
        svg = wdix::plots::missingness_svg(wdix::missingness_grid(ds, group));
      } else {
        const auto analysis = wdix::analyse(ds, group);
        if (kind == wdix::plots::PlotKind::Distribution) {
          svg = wdix::plots::distribution_svg(analysis.records,
                                              wdix::service::parse_metric_list(plot_metric), group);
        } else {
          if (plot_metric.empty()) throw wdix::Error(wdix::ErrorCode::UnknownMetric, "--metric is required for partition");
          svg = wdix::plots::partition_svg(analysis.records, wdix::parse_metric(plot_metric), group);
        }
      }
      const fs::path out = plot_output.value_or(ds.indicator_code + "_" + plot_kind + ".svg");
      write_file(out, svg);
      std::cout << "Wrote " << out.string() << "\n";
    } else if (*serve) {
      const auto settings = load_settings(global);
      wdix::service::ServerConfig cfg;
      cfg.data_dir = settings.resolve("data_dir", global.data_dir, "wdi_data");
      cfg.host = settings.resolve("host", host_flag, cfg.host);
      cfg.cors_origin = settings.resolve("cors_origin", cors_flag, cfg.cors_origin);
      const auto port_text = settings.resolve("port", port_flag, "8080");
      auto port = wdix::parse_int(port_text);
      if (!port || *port < 0 || *port > 65535) {
        throw wdix::Error(wdix::ErrorCode::InvalidArgument, "invalid port '" + port_text + "'");
      }
      cfg.port = *port;
      wdix::service::HttpServer server(cfg);
      const int bound = server.bind();
      std::cout << "Serving " << cfg.data_dir.string() << " on http://" << cfg.host << ":" << bound
                << wdix::service::kApiPrefix << "/indicators/{code}/..." << std::endl;
      server.listen();
    }
  } catch (const wdix::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return wdix::is_io_error(e.code()) ? 2 : 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
