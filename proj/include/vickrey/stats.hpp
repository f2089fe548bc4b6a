#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace vickrey {

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Standard error of the mean (0 for a single observation).
inline double stderr_of(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  const auto n = static_cast<double>(xs.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

inline double median_of(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of empty sample");
  std::vector<double> v(xs.begin(), xs.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double hi = v[mid];
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr = 0.0;
};

/// Least squares of ln(regret) on ln(T).
inline SlopeFit fit_regret_slope(std::span<const std::pair<double, double>> series) {
  if (series.size() < 3) throw std::invalid_argument("slope fit needs at least 3 horizons");
  std::vector<double> xs, ys;
  for (const auto& [T, regret] : series) {
    if (!(T > 0.0)) throw std::invalid_argument("horizons must be positive");
    if (!(regret > 0.0)) throw std::invalid_argument("slope fit needs positive regret values");
    xs.push_back(std::log(T));
    ys.push_back(std::log(regret));
  }
  const auto n = static_cast<double>(xs.size());
  const double mx = mean_of(xs), my = mean_of(ys);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("slope fit needs distinct horizons");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - fit.intercept - fit.slope * xs[i];
    rss += r * r;
  }
  fit.stderr = std::sqrt(rss / (n - 2.0) / sxx);
  return fit;
}

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for k successes in n trials (z = 1.96 by default).
inline WilsonInterval wilson_interval(long k, long n, double z = 1.959963984540054) {
  if (n <= 0 || k < 0 || k > n) throw std::invalid_argument("wilson interval needs 0 <= k <= n, n > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
  const double half = z / (1.0 + z2 / nn) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace vickrey
