#pragma once

// Static SVG renderings of the distribution, partition and missingness views.
// Every mark carries data-* attributes with the values it encodes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wdix/diagnostics.hpp"
#include "wdix/error.hpp"
#include "wdix/panel.hpp"

namespace wdix::plots {

enum class PlotKind { Distribution, Partition, Missingness };

inline PlotKind parse_plot_kind(std::string_view name) {
  if (name == "distribution") return PlotKind::Distribution;
  if (name == "partition") return PlotKind::Partition;
  if (name == "missingness") return PlotKind::Missingness;
  throw Error(ErrorCode::UnknownPlot,
              "'" + std::string(name) + "' (expected distribution, partition or missingness)");
}

inline constexpr std::array<std::string_view, 10> kPalette = {
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
    "#e6ab02", "#a6761d", "#1f78b4", "#b2df8a", "#fb9a99"};
inline constexpr std::string_view kMissingColour = "#000000";
inline constexpr std::string_view kPresentColour = "#d3d3d3";

/// Colour per group level, assigned in sorted level order.
inline std::map<std::string, std::string> level_colours(std::vector<std::string> levels) {
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    out[levels[i]] = std::string(kPalette[i % kPalette.size()]);
  }
  return out;
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

class Svg {
 public:
  Svg(double width, double height) : width_(width), height_(height) {}

  void raw(const std::string& s) { body_ << s << "\n"; }

  void text(double x, double y, std::string_view s, std::string_view anchor = "start",
            double size = 11) {
    body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << num(size)
          << "\" text-anchor=\"" << anchor << "\">" << xml_escape(s) << "</text>\n";
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke = "#444") {
    body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
          << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\"/>\n";
  }

  std::string str() const {
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\""
       << num(height_) << "\" viewBox=\"0 0 " << num(width_) << " " << num(height_) << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
       << body_.str() << "</svg>\n";
    return os.str();
  }

 private:
  double width_, height_;
  std::ostringstream body_;
};

inline std::string group_of(const DiagnosticRecord& r, std::optional<GroupVar> g) {
  if (!g) return std::string(kGlobalScope);
  auto it = r.group_labels.find(*g);
  if (it == r.group_labels.end()) {
    throw Error(ErrorCode::UnknownGroupVar,
                "record for " + r.country + " lacks " + std::string(to_string(*g)) + " label");
  }
  return it->second;
}

}  // namespace detail

/// One panel per metric; each country is a dot, stacked within value bins so
/// identical values form a single column.
inline std::string distribution_svg(const std::vector<DiagnosticRecord>& records,
                                    std::vector<Metric> metrics, std::optional<GroupVar> group) {
  if (metrics.empty()) metrics.assign(kMetrics.begin(), kMetrics.end());
  constexpr double kPanelW = 620, kPanelH = 170, kMargin = 40, kDot = 3.2;
  constexpr int kBins = 60;

  std::vector<std::string> levels;
  for (const auto& r : records) levels.push_back(detail::group_of(r, group));
  const auto colours = level_colours(levels);

  detail::Svg svg(kPanelW + 2 * kMargin, metrics.size() * (kPanelH + kMargin) + kMargin);
  for (std::size_t p = 0; p < metrics.size(); ++p) {
    const Metric m = metrics[p];
    const double top = kMargin + p * (kPanelH + kMargin);
    const double base = top + kPanelH;
    svg.text(kMargin, top - 8, to_string(m), "start", 13);
    svg.line(kMargin, base, kMargin + kPanelW, base);

    std::vector<std::pair<double, std::size_t>> vals;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (const auto& v = records[i].get(m); v && std::isfinite(*v)) vals.emplace_back(*v, i);
    }
    if (vals.empty()) {
      svg.text(kMargin + kPanelW / 2, base - kPanelH / 2, "no values", "middle");
      continue;
    }
    std::sort(vals.begin(), vals.end());
    const double lo = vals.front().first, hi = vals.back().first;
    svg.text(kMargin, base + 14, format_double(lo), "start", 10);
    svg.text(kMargin + kPanelW, base + 14, format_double(hi), "end", 10);

    std::map<int, int> stack;
    for (const auto& [v, i] : vals) {
      const int bin = hi > lo ? std::min(kBins - 1, static_cast<int>((v - lo) / (hi - lo) * kBins)) : 0;
      const double cx = hi > lo ? kMargin + (bin + 0.5) * kPanelW / kBins : kMargin + kPanelW / 2;
      const int level = stack[bin]++;
      const double cy = base - kDot - level * 2 * kDot;
      const auto& r = records[i];
      const auto& colour = colours.at(detail::group_of(r, group));
      svg.raw("<circle class=\"dot\" data-metric=\"" + std::string(to_string(m)) +
              "\" data-country=\"" + detail::xml_escape(r.country) + "\" data-value=\"" +
              format_double(v) + "\" cx=\"" + detail::num(cx) + "\" cy=\"" + detail::num(cy) +
              "\" r=\"" + detail::num(kDot) + "\" fill=\"" + colour + "\"><title>" +
              detail::xml_escape(r.country) + ": " + format_double(v) + "</title></circle>");
    }
  }
  return svg.str();
}

/// Per group level, one bar per country sorted descending, drawn over a lighter bar
/// at the group's mean value.
inline std::string partition_svg(const std::vector<DiagnosticRecord>& records, Metric metric,
                                 GroupVar group) {
  constexpr double kBarH = 9, kGap = 14, kLabelW = 210, kPlotW = 520, kMargin = 30;

  std::map<std::string, std::vector<std::pair<double, std::string>>> by_level;
  double lo = 0.0, hi = 0.0;
  for (const auto& r : records) {
    const auto& v = r.get(metric);
    if (!v || !std::isfinite(*v)) continue;
    by_level[detail::group_of(r, group)].emplace_back(*v, r.country);
    lo = std::min(lo, *v);
    hi = std::max(hi, *v);
  }
  if (hi == lo) hi = lo + 1.0;
  std::vector<std::string> levels;
  for (const auto& [level, v] : by_level) levels.push_back(level);
  const auto colours = level_colours(levels);

  std::size_t rows = 0;
  for (const auto& [level, v] : by_level) rows += v.size();
  const double height = 2 * kMargin + rows * kBarH + by_level.size() * kGap + 20;
  detail::Svg svg(kLabelW + kPlotW + 2 * kMargin, height);

  auto xpos = [&](double v) { return kMargin + kLabelW + (v - lo) / (hi - lo) * kPlotW; };
  const double zero = xpos(0.0);
  svg.text(kMargin, kMargin - 10, std::string(to_string(metric)) + " by " +
                                      std::string(to_string(group)), "start", 13);

  double y = kMargin;
  for (auto& [level, vals] : by_level) {
    std::stable_sort(vals.begin(), vals.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    double mean = 0.0;
    for (const auto& [v, c] : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    const double block = vals.size() * kBarH;
    const auto& colour = colours.at(level);

    svg.raw("<rect class=\"group-mean\" data-group=\"" + detail::xml_escape(level) +
            "\" data-value=\"" + format_double(mean) + "\" x=\"" +
            detail::num(std::min(zero, xpos(mean))) + "\" y=\"" + detail::num(y) +
            "\" width=\"" + detail::num(std::abs(xpos(mean) - zero)) + "\" height=\"" +
            detail::num(block) + "\" fill=\"" + colour + "\" fill-opacity=\"0.25\"/>");
    svg.text(kMargin + kLabelW - 6, y + block / 2 + 4, level, "end", 10);
    for (const auto& [v, country] : vals) {
      svg.raw("<rect class=\"bar\" data-group=\"" + detail::xml_escape(level) +
              "\" data-country=\"" + detail::xml_escape(country) + "\" data-value=\"" +
              format_double(v) + "\" x=\"" + detail::num(std::min(zero, xpos(v))) + "\" y=\"" +
              detail::num(y + 1) + "\" width=\"" + detail::num(std::abs(xpos(v) - zero)) +
              "\" height=\"" + detail::num(kBarH - 2) + "\" fill=\"" + colour + "\"><title>" +
              detail::xml_escape(country) + ": " + format_double(v) + "</title></rect>");
      y += kBarH;
    }
    y += kGap;
  }
  svg.line(zero, kMargin, zero, y);
  return svg.str();
}

/// Country x year grid, black where missing, light grey where observed.
inline std::string missingness_svg(const MissingnessGrid& grid) {
  constexpr double kCell = 8, kLabelW = 220, kMargin = 30;
  const double width = kLabelW + grid.years.size() * kCell + 2 * kMargin;
  const double height = grid.countries.size() * kCell + 2 * kMargin + 30;
  detail::Svg svg(width, height);

  char caption[128];
  std::snprintf(caption, sizeof caption, "Missing %.1f%%, present %.1f%%",
                grid.overall_pct_missing, grid.overall_pct_present);
  svg.text(kMargin, kMargin - 10, caption, "start", 12);

  for (std::size_t i = 0; i < grid.countries.size(); ++i) {
    const double y = kMargin + i * kCell;
    svg.text(kMargin + kLabelW - 4, y + kCell - 1, grid.countries[i] + " (" + grid.labels[i] + ")",
             "end", 7);
    for (std::size_t k = 0; k < grid.years.size(); ++k) {
      const bool ok = grid.is_present(i, k);
      svg.raw(std::string("<rect class=\"") + (ok ? "present" : "missing") +
              "\" data-country=\"" + detail::xml_escape(grid.countries[i]) + "\" data-year=\"" +
              std::to_string(grid.years[k]) + "\" x=\"" +
              detail::num(kMargin + kLabelW + k * kCell) + "\" y=\"" + detail::num(y) +
              "\" width=\"" + detail::num(kCell) + "\" height=\"" + detail::num(kCell) +
              "\" fill=\"" + std::string(ok ? kPresentColour : kMissingColour) + "\"/>");
    }
  }
  for (std::size_t k = 0; k < grid.years.size(); k += 5) {
    svg.text(kMargin + kLabelW + k * kCell, kMargin + grid.countries.size() * kCell + 12,
             std::to_string(grid.years[k]), "start", 8);
  }
  return svg.str();
}

}  // namespace wdix::plots
