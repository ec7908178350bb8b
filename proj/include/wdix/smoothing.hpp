#pragma once

// Friedman's variable-span "super smoother" and an orthonormal quadratic basis of
// the time index. The smoother follows the classic running-lines formulation:
// local linear fits over symmetric nearest-neighbour windows, updated
// incrementally as the window slides.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "wdix/error.hpp"

namespace wdix {

struct SmootherResult {
  std::vector<double> trend;
  std::vector<double> remainder;
  std::vector<double> spans_used;
};

struct SupersmootherOptions {
  std::array<double, 3> spans{0.05, 0.2, 0.5};  // tweeter, midrange, woofer
  std::size_t min_cv_length = 10;  // shorter series use the woofer span only
};

namespace detail {

inline constexpr double kBig = 1.0e20;
inline constexpr double kSmallVariance = 1.0e-3;  // relative to the interquartile x range

/// Running-lines smoother. Window half-width is round(span * n / 2), at least 2.
/// When `cv_abs_residual` is non-empty it receives |y_j - s_j| / (1 - h_jj), the
/// leave-one-out absolute residual.
inline void running_lines(std::span<const double> x, std::span<const double> y, double span,
                          double var_floor, std::span<double> smooth,
                          std::span<double> cv_abs_residual = {}) {
  const auto n = static_cast<long>(x.size());
  long half = static_cast<long>(0.5 * span * static_cast<double>(n) + 0.5);
  if (half < 2) half = 2;
  const long initial = std::min(2 * half + 1, n);

  double xm = 0.0, ym = 0.0, var = 0.0, cvar = 0.0, count = 0.0;
  auto add = [&](double xv, double yv) {
    const double prev = count;
    count += 1.0;
    xm = (prev * xm + xv) / count;
    ym = (prev * ym + yv) / count;
    const double tmp = prev > 0.0 ? count * (xv - xm) / prev : 0.0;
    var += tmp * (xv - xm);
    cvar += tmp * (yv - ym);
  };
  auto remove = [&](double xv, double yv) {
    const double prev = count;
    count -= 1.0;
    const double tmp = count > 0.0 ? prev * (xv - xm) / count : 0.0;
    var -= tmp * (xv - xm);
    cvar -= tmp * (yv - ym);
    if (count > 0.0) {
      xm = (prev * xm - xv) / count;
      ym = (prev * ym - yv) / count;
    }
  };

  for (long i = 0; i < initial; ++i) add(x[i], y[i]);

  for (long j = 0; j < n; ++j) {
    const long out = j - half - 1;
    const long in = j + half;
    if (out >= 0 && in < n) {
      remove(x[out], y[out]);
      add(x[in], y[in]);
    }
    const double slope = var > var_floor ? cvar / var : 0.0;
    smooth[j] = slope * (x[j] - xm) + ym;

    if (cv_abs_residual.empty()) continue;
    double leverage = count > 0.0 ? 1.0 / count : 0.0;
    if (var > var_floor) leverage += (x[j] - xm) * (x[j] - xm) / var;
    const double denom = 1.0 - leverage;
    if (denom > 0.0) {
      cv_abs_residual[j] = std::abs(y[j] - smooth[j]) / denom;
    } else {
      cv_abs_residual[j] = j > 0 ? cv_abs_residual[j - 1] : 0.0;
    }
  }
}

inline void check_increasing(std::span<const double> t) {
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) {
      throw Error(ErrorCode::NonIncreasingTime,
                  "time index must be strictly increasing (position " + std::to_string(i) + ")");
    }
  }
}

}  // namespace detail

/// Decomposes y into trend + remainder with cross-validated variable spans.
inline SmootherResult supersmooth(std::span<const double> y, std::span<const double> t,
                                  const SupersmootherOptions& opt = {}) {
  const std::size_t n = y.size();
  if (t.size() != n) {
    throw Error(ErrorCode::LengthMismatch,
                "series has " + std::to_string(n) + " values but " + std::to_string(t.size()) +
                    " time points");
  }
  if (n < 5) {
    throw Error(ErrorCode::SeriesTooShort, "smoothing needs at least 5 points, got " +
                                               std::to_string(n));
  }
  detail::check_increasing(t);

  // Variance floor scaled to the spread of the central half of t.
  const std::size_t q1 = n / 4;
  const double scale = t[3 * q1 - 1] - t[q1 - 1];
  const double var_floor = std::pow(detail::kSmallVariance * scale, 2);

  const auto& spans = opt.spans;
  SmootherResult out;
  out.trend.assign(n, 0.0);
  out.spans_used.assign(n, spans[2]);

  if (n < opt.min_cv_length) {
    detail::running_lines(t, y, spans[2], var_floor, out.trend);
  } else {
    std::array<std::vector<double>, 3> fit;
    std::array<std::vector<double>, 3> cv;
    std::vector<double> residual(n);
    for (std::size_t s = 0; s < 3; ++s) {
      fit[s].assign(n, 0.0);
      cv[s].assign(n, 0.0);
      detail::running_lines(t, y, spans[s], var_floor, fit[s], residual);
      detail::running_lines(t, residual, spans[1], var_floor, cv[s]);
    }

    // Per point, the span with the smallest smoothed CV residual; ties go to the larger span.
    std::vector<double> best(n);
    for (std::size_t j = 0; j < n; ++j) {
      double resmin = detail::kBig;
      for (std::size_t s = 0; s < 3; ++s) {
        if (cv[s][j] <= resmin) {
          resmin = cv[s][j];
          best[j] = spans[s];
        }
      }
    }

    std::vector<double> chosen(n);
    detail::running_lines(t, best, spans[1], var_floor, chosen);
    std::vector<double> blended(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double span = std::clamp(chosen[j], spans[0], spans[2]);
      out.spans_used[j] = span;
      double f = span - spans[1];
      if (f < 0.0) {
        f = -f / (spans[1] - spans[0]);
        blended[j] = (1.0 - f) * fit[1][j] + f * fit[0][j];
      } else {
        f = f / (spans[2] - spans[1]);
        blended[j] = (1.0 - f) * fit[1][j] + f * fit[2][j];
      }
    }
    detail::running_lines(t, blended, spans[0], var_floor, out.trend);
  }

  out.remainder.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.remainder[j] = y[j] - out.trend[j];
  return out;
}

/// Convenience overload on the rank index 1..n.
inline SmootherResult supersmooth(std::span<const double> y) {
  std::vector<double> t(y.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i + 1);
  return supersmooth(y, t);
}

// ---------------------------------------------------------------------------

/// Degree-1 and degree-2 polynomials of t, orthogonal to the constant and to each
/// other, each with unit Euclidean norm.
struct OrthoBasis {
  std::vector<double> p1;
  std::vector<double> p2;
};

inline OrthoBasis orthogonal_poly(std::span<const double> t) {
  const std::size_t n = t.size();
  if (n < 3) {
    throw Error(ErrorCode::SeriesTooShort,
                "orthogonal quadratic basis needs at least 3 points, got " + std::to_string(n));
  }
  detail::check_increasing(t);

  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  auto center = [n](std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(n);
    for (double& x : v) x -= m;
  };
  auto normalize = [&](std::vector<double>& v) {
    const double norm = std::sqrt(dot(v, v));
    for (double& x : v) x /= norm;
  };
  auto project_out = [&](std::vector<double>& v, const std::vector<double>& u) {
    const double c = dot(v, u);
    for (std::size_t i = 0; i < n; ++i) v[i] -= c * u[i];
  };

  // Centring and scaling t first keeps t^2 well conditioned for calendar years.
  OrthoBasis b;
  b.p1.assign(t.begin(), t.end());
  center(b.p1);
  const double spread = std::sqrt(dot(b.p1, b.p1));
  for (double& x : b.p1) x /= spread;

  b.p2.resize(n);
  for (std::size_t i = 0; i < n; ++i) b.p2[i] = b.p1[i] * b.p1[i];
  // Two Gram-Schmidt sweeps.
  for (int sweep = 0; sweep < 2; ++sweep) {
    center(b.p2);
    project_out(b.p2, b.p1);
  }
  normalize(b.p1);
  normalize(b.p2);
  return b;
}

inline OrthoBasis orthogonal_poly(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i + 1);
  return orthogonal_poly(t);
}

struct TrendShapeCoefficients {
  double beta1 = 0.0;  // linearity
  double beta2 = 0.0;  // curvature
};

/// Least-squares coefficients of trend on (1, p1, p2); orthonormality reduces them
/// to projections.
inline TrendShapeCoefficients trend_shape_regression(std::span<const double> trend,
                                                     const OrthoBasis& basis) {
  if (trend.size() != basis.p1.size() || trend.size() != basis.p2.size()) {
    throw Error(ErrorCode::LengthMismatch,
                "trend has " + std::to_string(trend.size()) + " points, basis has " +
                    std::to_string(basis.p1.size()));
  }
  TrendShapeCoefficients c;
  for (std::size_t i = 0; i < trend.size(); ++i) {
    c.beta1 += trend[i] * basis.p1[i];
    c.beta2 += trend[i] * basis.p2[i];
  }
  return c;
}

}  // namespace wdix
