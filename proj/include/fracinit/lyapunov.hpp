#pragma once

// Per-layer drift and variance of log||x_k||, and the zero-output law of ReLU
// networks.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "fracinit/detail/beta_series.hpp"
#include "fracinit/errors.hpp"
#include "fracinit/specfn.hpp"
#include "fracinit/types.hpp"

namespace fracinit::lyapunov {

struct LogNormStats {
  double mu = 0.0;  // nats per layer
  double s2 = 0.0;  // nats^2 per layer
  bool conditional_on_nonzero = false;
};

/// Variance of a mixture: sum p_i v_i + sum p_i m_i^2 - (sum p_i m_i)^2,
/// evaluated in centered form.
inline double mixture_variance(std::span<const double> weights, std::span<const double> means,
                               std::span<const double> vars) {
  using ::fracinit::detail::require;
  require(weights.size() == means.size() && means.size() == vars.size() && !weights.empty(),
          "mixture_variance: weights, means and vars need equal nonzero length");
  double total = 0.0;
  for (double w : weights) {
    require(w >= 0.0 && std::isfinite(w), "mixture_variance: weights must be nonnegative");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-12, "mixture_variance: weights must sum to 1");
  double mean = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) mean += weights[i] * means[i];
  double out = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double c = means[i] - mean;
    out += weights[i] * (vars[i] + c * c);
  }
  return out;
}

/// P(x_k = 0) = 1 - (1 - 2^{-d})^k for a ReLU network of width d.
inline double zero_output_probability(std::int64_t d, std::int64_t k) {
  ::fracinit::detail::require(d >= 1 && k >= 0, "zero_output_probability: need d >= 1, k >= 0");
  if (k == 0) return 0.0;
  return -std::expm1(static_cast<double>(k) * std::log1p(-std::ldexp(1.0, -static_cast<int>(std::min<std::int64_t>(d, 2000)))));
}

/// Drift and spread of ln(||x_{k+1}|| / ||x_k||) for ReLU, conditional on a nonzero output:
/// mixture over n >= 1 active units with weights C(d,n)/(2^d - 1) of
/// ln(chi2_n) moments.
inline LogNormStats relu_log_stats(double sigma, std::int64_t d) {
  ::fracinit::detail::require(sigma > 0.0 && std::isfinite(sigma), "relu_log_stats: sigma must be positive");
  ::fracinit::detail::require(d >= 1, "relu_log_stats: d must be >= 1");
  std::vector<double> w, m, v;
  w.reserve(static_cast<std::size_t>(d));
  const double log_norm = std::log1p(-std::ldexp(1.0, -static_cast<int>(std::min<std::int64_t>(d, 2000))));
  for (std::int64_t n = 1; n <= d; ++n) {
    const double lw = (d == 1 ? 0.0 : specfn::log_binomial_pmf(d, n, 0.5) - log_norm);
    w.push_back(d == 1 ? 1.0 : std::exp(lw));
    const double h = 0.5 * static_cast<double>(n);
    m.push_back(specfn::kLn2 + specfn::digamma(h));
    v.push_back(specfn::trigamma(h));
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;  // removes rounding of the normalizer only
  double mean = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) mean += w[i] * m[i];
  return {std::log(sigma) + 0.5 * mean, 0.25 * mixture_variance(w, m, v), true};
}

/// Certified pieces of E[ln(chi2_n + a^2 chi2_m)] and its variance.
struct LogMoments {
  double mean = 0.0;      // E ln(chi2_n + a^2 chi2_m)
  double var = 0.0;       // Var ln(...)
  double norm = 1.0;      // sum_k w_{k,n} B(k+1, D/2); 1 analytically
  double tail_bound = 0.0;
  std::int64_t terms = 0;
};

namespace detail {

inline void require_slope(const Activation& act) {
  if (act.is_randomized()) {
    ::fracinit::detail::require(act.interval().lo > 0.0,
                                "log-moment series need a slope interval with lo > 0");
  } else {
    ::fracinit::detail::require(act.slope() > 0.0 && act.slope() <= 1.0,
                                "log-moment series need a slope in (0,1]");
  }
}

/// E[ln a^2] under the slope law.
inline double mean_log_slope_sq(const Activation& act) {
  if (!act.is_randomized()) return 2.0 * std::log(act.slope());
  const auto& r = act.interval();
  auto prim = [](double a) { return a == 0.0 ? 0.0 : a * std::log(a) - a; };
  return 2.0 * (prim(r.hi) - prim(r.lo)) / (r.hi - r.lo);
}

}  // namespace detail

/// n positive and m negative coordinates; a fixed slope gives the full
/// mean/variance pair, a randomized slope only a meaningful mean.
inline LogMoments log_moments(std::int64_t n, std::int64_t m, const Activation& act,
                              const specfn::EvalBudget& budget = {}) {
  budget.validate();
  detail::require_slope(act);
  ::fracinit::detail::require(n >= 0 && m >= 0 && n + m >= 1, "log_moments: need n, m >= 0, n+m >= 1");
  const double half_dof = 0.5 * static_cast<double>(n + m);
  if (n == 0) {
    return {detail::mean_log_slope_sq(act) + specfn::kLn2 + specfn::digamma(half_dof),
            specfn::trigamma(half_dof), 1.0, 0.0, 1};
  }
  ::fracinit::detail::SlopeMoments slopes(act);
  auto ls = ::fracinit::detail::log_series(static_cast<long>(n), static_cast<long>(m), slopes,
                                           budget.rel_tol, budget.max_terms);
  LogMoments out;
  out.norm = ls.norm;
  out.mean = ls.mean_b + specfn::kLn2 - specfn::kEulerGamma;
  out.var = specfn::trigamma(half_dof) + ls.tri + ls.mean_b2 - ls.mean_b * ls.mean_b;
  out.tail_bound = ls.tail_b + ls.tail_tri + ls.tail_b2 + 2.0 * std::abs(ls.mean_b) * ls.tail_b +
                   ls.tail_b * ls.tail_b;
  out.terms = static_cast<std::int64_t>(ls.terms);
  return out;
}

/// m_n = E ln(chi2_n + a^2 chi2_{d-n}).
inline double mn_series(std::int64_t n, std::int64_t d, double a, const specfn::EvalBudget& budget = {}) {
  ::fracinit::detail::require(d >= 1 && n >= 0 && n <= d, "mn_series: need 0 <= n <= d");
  return log_moments(n, d - n, Activation::prelu(a), budget).mean;
}

/// v_n = Var ln(chi2_n + a^2 chi2_{d-n}).
inline double vn_series(std::int64_t n, std::int64_t d, double a, const specfn::EvalBudget& budget = {}) {
  ::fracinit::detail::require(d >= 1 && n >= 0 && n <= d, "vn_series: need 0 <= n <= d");
  return log_moments(n, d - n, Activation::prelu(a), budget).var;
}

/// Sum_k w_{k,n} B(k+1, d/2) evaluated by the truncated series.
inline double weight_normalization(std::int64_t n, std::int64_t d, double a,
                                   const specfn::EvalBudget& budget = {}) {
  ::fracinit::detail::require(d >= 1 && n >= 1 && n <= d, "weight_normalization: need 1 <= n <= d");
  return log_moments(n, d - n, Activation::prelu(a), budget).norm;
}

/// Unconditional statistics for a slope a in (0,1]: mixture over the number of
/// positive pre-activations n ~ Bin(d, 1/2).
inline LogNormStats prelu_log_stats(double sigma, std::int64_t d, double a,
                                    const specfn::EvalBudget& budget = {}) {
  ::fracinit::detail::require(sigma > 0.0 && std::isfinite(sigma), "prelu_log_stats: sigma must be positive");
  ::fracinit::detail::require(d >= 1, "prelu_log_stats: d must be >= 1");
  ::fracinit::detail::require(a > 0.0 && a <= 1.0, "prelu_log_stats: a must lie in (0,1]");
  std::vector<double> w, m, v;
  const Activation act = Activation::prelu(a);
  for (std::int64_t n = 0; n <= d; ++n) {
    w.push_back(d == 1 ? 0.5 : std::exp(specfn::log_binomial_pmf(d, n, 0.5)));
    if (a == 1.0 && n > 0) {
      m.push_back(m.back());
      v.push_back(v.back());
      continue;
    }
    auto lm = log_moments(n, d - n, act, budget);
    m.push_back(lm.mean);
    v.push_back(lm.var);
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  double mean = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) mean += w[i] * m[i];
  return {std::log(sigma) + 0.5 * mean, 0.25 * mixture_variance(w, m, v), false};
}

/// Drift mu(sigma) for any activation without dropout: conditional ReLU drift
/// for a = 0, otherwise ln sigma + 1/2 sum_n p_d(n) E[m_n] (a randomized slope
/// enters linearly through E[w_{k,n}]).
inline double drift(double sigma, std::int64_t d, const Activation& act,
                    const specfn::EvalBudget& budget = {}) {
  if (!act.is_randomized()) {
    if (act.slope() == 0.0) return relu_log_stats(sigma, d).mu;
    return prelu_log_stats(sigma, d, act.slope(), budget).mu;
  }
  ::fracinit::detail::require(sigma > 0.0, "drift: sigma must be positive");
  double mean = 0.0, total = 0.0;
  for (std::int64_t n = 0; n <= d; ++n) {
    const double w = d == 1 ? 0.5 : std::exp(specfn::log_binomial_pmf(d, n, 0.5));
    total += w;
    mean += w * log_moments(n, d - n, act, budget).mean;
  }
  return std::log(sigma) + 0.5 * mean / total;
}

}  // namespace fracinit::lyapunov
