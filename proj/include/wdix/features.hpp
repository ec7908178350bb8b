#pragma once

// Per-series scalar indices. All functions take the observed values of one
// country in time order; gaps are treated as consecutive observations.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wdix/error.hpp"
#include "wdix/smoothing.hpp"

namespace wdix {

namespace detail {

inline void require_length(std::span<const double> y, std::size_t min, const char* what) {
  if (y.size() < min) {
    throw Error(ErrorCode::SeriesTooShort, std::string(what) + " needs at least " +
                                               std::to_string(min) + " points, got " +
                                               std::to_string(y.size()));
  }
}

inline double mean(std::span<const double> y) {
  return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

inline double population_variance(std::span<const double> y) {
  const double m = mean(y);
  double ss = 0.0;
  for (double v : y) ss += (v - m) * (v - m);
  return ss / static_cast<double>(y.size());
}

// Type-7 sample quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double median(std::span<const double> y) {
  std::vector<double> s(y.begin(), y.end());
  std::sort(s.begin(), s.end());
  return quantile_sorted(s, 0.5);
}

}  // namespace detail

/// max(0, 1 - Var(R) / Var(y)) with the supersmoother decomposition. A zero-variance
/// series has no trend to speak of and yields 0.
inline double trend_strength(std::span<const double> y) {
  detail::require_length(y, 5, "trend strength");
  const double total = detail::population_variance(y);
  if (!(total > 0.0)) return 0.0;
  const auto dec = supersmooth(y);
  const double ratio = detail::population_variance(dec.remainder) / total;
  return std::clamp(1.0 - ratio, 0.0, 1.0);
}

/// Coefficients of the supersmoothed trend on the orthonormal quadratic basis of
/// the rank index.
inline TrendShapeCoefficients linearity_curvature(std::span<const double> y) {
  detail::require_length(y, 5, "linearity/curvature");
  const auto dec = supersmooth(y);
  return trend_shape_regression(dec.trend, orthogonal_poly(y.size()));
}

/// Sample standard deviation of the first differences.
inline double smoothness(std::span<const double> y) {
  detail::require_length(y, 3, "smoothness");
  std::vector<double> d(y.size() - 1);
  for (std::size_t i = 0; i + 1 < y.size(); ++i) d[i] = y[i + 1] - y[i];
  const double m = detail::mean(d);
  double ss = 0.0;
  for (double v : d) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(d.size() - 1));
}

/// Number of times the series moves between "above the median" and "at or below it".
inline int crossing_points(std::span<const double> y) {
  detail::require_length(y, 2, "crossing points");
  const double mid = detail::median(y);
  int count = 0;
  bool prev = y[0] > mid;
  for (std::size_t i = 1; i < y.size(); ++i) {
    const bool cur = y[i] > mid;
    if (cur != prev) ++count;
    prev = cur;
  }
  return count;
}

inline constexpr int kFlatSpotBins = 10;

/// Bin (1..10) of each value over ten equal-width intervals of [min, max]. Intervals
/// are closed on the right; the minimum belongs to the first.
inline std::vector<int> equal_width_bins(std::span<const double> y) {
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const double lo = *lo_it, hi = *hi_it;
  std::array<double, kFlatSpotBins + 1> breaks{};
  const double step = (hi - lo) / kFlatSpotBins;
  for (int k = 0; k <= kFlatSpotBins; ++k) breaks[k] = lo + k * step;
  breaks[kFlatSpotBins] = hi;

  std::vector<int> bins(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    int b = 1;
    while (b < kFlatSpotBins && y[i] > breaks[b]) ++b;
    bins[i] = b;
  }
  return bins;
}

/// Longest run of consecutive observations in the same equal-width bin. A series
/// with zero range is one flat run of length n.
inline int flat_spot(std::span<const double> y) {
  detail::require_length(y, 1, "flat spot");
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (!(*hi > *lo)) return static_cast<int>(y.size());
  const auto bins = equal_width_bins(y);
  int best = 1, run = 1;
  for (std::size_t i = 1; i < bins.size(); ++i) {
    run = bins[i] == bins[i - 1] ? run + 1 : 1;
    best = std::max(best, run);
  }
  return best;
}

/// Lag-1 autocorrelation; nullopt when the series has no variance.
inline std::optional<double> acf1(std::span<const double> y) {
  detail::require_length(y, 3, "autocorrelation");
  const double m = detail::mean(y);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    den += (y[i] - m) * (y[i] - m);
    if (i + 1 < y.size()) num += (y[i] - m) * (y[i + 1] - m);
  }
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

}  // namespace wdix
