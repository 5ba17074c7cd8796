#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "fracinit/errors.hpp"

namespace fracinit::stats {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// sup_x |F_n(x) - Phi(x)| for a sample (sorted internally).
inline double ks_statistic_normal(std::vector<double> z) {
  detail::require(!z.empty(), "ks_statistic_normal: empty sample");
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = normal_cdf(z[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Large-sample Kolmogorov critical value sqrt(-ln(alpha/2)/2) / sqrt(n).
inline double ks_critical_value(std::size_t n, double alpha = 0.01) {
  detail::require(n > 0 && alpha > 0.0 && alpha < 1.0, "ks_critical_value: need n > 0, alpha in (0,1)");
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(n));
}

/// Two-sample DKW band: with probability >= 1-alpha both empirical CDFs lie
/// within this distance of the truth jointly.
inline double dkw_two_sample_eps(std::size_t na, std::size_t nb, double alpha = 0.01) {
  detail::require(na > 0 && nb > 0, "dkw_two_sample_eps: empty sample");
  const double a = static_cast<double>(na), b = static_cast<double>(nb);
  return std::sqrt(std::log(2.0 / alpha) / 2.0 * (a + b) / (a * b));
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased
  std::size_t n = 0;
};

inline MeanVar mean_var(std::span<const double> x) {
  MeanVar out;
  out.n = x.size();
  if (x.empty()) return out;
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  out.mean = m;
  out.var = x.size() > 1 ? ss / static_cast<double>(x.size() - 1) : 0.0;
  return out;
}

}  // namespace fracinit::stats
