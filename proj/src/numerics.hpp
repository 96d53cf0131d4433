#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace yyf {

/// log(sum_i exp(args[i])) without overflow; -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> args) {
  if (args.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(args.begin(), args.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double a : args) s += std::exp(a - top);
  return top + std::log(s);
}

/// Normalized weights from log-weights; returns the effective sample size.
inline double normalize_log_weights(std::span<const double> log_weights, std::span<double> weights) {
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  double s = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    weights[i] = std::exp(log_weights[i] - top);
    s += weights[i];
  }
  double s2 = 0.0;
  for (double& w : weights) {
    w /= s;
    s2 += w * w;
  }
  return 1.0 / s2;
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
  MeanStderr r;
  r.count = xs.size();
  if (xs.empty()) return r;
  double s = 0.0;
  for (double x : xs) s += x;
  r.mean = s / static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return r;
}

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
};

/// Ordinary least squares y = intercept + slope x with residual-based errors.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  LineFit f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    const double s2 = rss / static_cast<double>(n - 2);
    f.slope_se = std::sqrt(s2 / sxx);
    f.intercept_se = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
  }
  return f;
}

/// Weighted least squares with known per-point standard deviations.
inline LineFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                                 std::span<const double> sd) {
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / (sd[i] * sd[i]);
    s += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = s * sxx - sx * sx;
  LineFit f;
  f.slope = (s * sxy - sx * sy) / det;
  f.intercept = (sxx * sy - sx * sxy) / det;
  f.slope_se = std::sqrt(s / det);
  f.intercept_se = std::sqrt(sxx / det);
  return f;
}

}  // namespace yyf
