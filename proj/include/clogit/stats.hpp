#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "clogit/errors.hpp"
#include "clogit/types.hpp"

namespace clogit {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

// Survival function of the Kolmogorov distribution, Q(lambda) = P(K > lambda).
// Small lambda uses the theta-function form 1 - sqrt(2*pi)/lambda * sum of
// exp(-(2k-1)^2 pi^2 / (8 lambda^2)); large lambda the alternating series
// 2 * sum (-1)^(j-1) exp(-2 j^2 lambda^2). Crossover at 1.18 keeps both
// series short at full double accuracy.
inline double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    const double w = std::exp(-std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda));
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / lambda *
                       (w + std::pow(w, 9.0) + std::pow(w, 25.0) + std::pow(w, 49.0));
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Two-sample Kolmogorov-Smirnov test. The statistic is the exact supremum
// of |F1 - F2| over the pooled sample points using right-continuous
// empirical CDFs; the p-value uses the asymptotic Kolmogorov distribution
// at lambda = D * sqrt(n1 n2 / (n1 + n2)).
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw EmptySampleError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  KsResult result;
  result.statistic = d;
  result.n1 = a.size();
  result.n2 = b.size();
  result.p_value = kolmogorov_sf(d * std::sqrt(n1 * n2 / (n1 + n2)));
  return result;
}

struct DensityCurve {
  VectorXd grid;
  VectorXd density;
  double bandwidth = 0.0;
};

namespace detail {

// Type-7 (linear interpolation) sample quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

// Gaussian-kernel density estimate on an even grid spanning
// [min - 3h, max + 3h], bandwidth by Silverman's rule
// 0.9 * min(sd, IQR/1.34) * n^(-1/5). A zero IQR falls back to the sd.
inline DensityCurve kde(const std::vector<double>& sample, int grid_points = 512) {
  if (sample.empty()) throw EmptySampleError("kde: empty sample");
  if (sample.size() < 2) throw DegenerateSampleError("kde: need at least two points");
  if (grid_points < 2) throw Error("kde: need at least two grid points");
  const double n = static_cast<double>(sample.size());
  double mean = 0.0;
  for (double x : sample) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : sample) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) throw DegenerateSampleError("kde: constant sample");
  std::vector<double> sorted(sample);
  std::sort(sorted.begin(), sorted.end());
  const double iqr = detail::quantile_sorted(sorted, 0.75) - detail::quantile_sorted(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  const double h = 0.9 * spread * std::pow(n, -0.2);

  DensityCurve curve;
  curve.bandwidth = h;
  curve.grid.resize(grid_points);
  curve.density.resize(grid_points);
  const double lo = sorted.front() - 3.0 * h;
  const double hi = sorted.back() + 3.0 * h;
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
  for (int g = 0; g < grid_points; ++g) {
    const double x = lo + step * static_cast<double>(g);
    double acc = 0.0;
    for (double s : sample) {
      const double z = (x - s) / h;
      acc += std::exp(-0.5 * z * z);
    }
    curve.grid(g) = x;
    curve.density(g) = norm * acc;
  }
  return curve;
}

}  // namespace clogit
