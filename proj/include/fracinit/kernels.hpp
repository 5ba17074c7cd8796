#pragma once

// Moment kernels I(s,d) = E||phi(z) (.) eps / q||^s for standard normal z in
// R^d, critical variances and their large-d approximations.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "fracinit/detail/beta_series.hpp"
#include "fracinit/errors.hpp"
#include "fracinit/specfn.hpp"
#include "fracinit/types.hpp"

namespace fracinit::kernels {

namespace detail {

using ::fracinit::detail::require;

/// ln sum_{t>=1} Bin(d,p)(t) Gamma(t/2+alpha)/Gamma(t/2); the t=0 orthant has
/// zero output and contributes nothing.
inline double log_chi_mixture(std::int64_t d, double p, double alpha) {
  if (p == 1.0) return specfn::log_gamma_ratio(0.5 * static_cast<double>(d), alpha);
  specfn::LogSumExp acc;
  for (std::int64_t t = 1; t <= d; ++t) {
    acc.add(specfn::log_binomial_pmf(d, t, p) +
            specfn::log_gamma_ratio(0.5 * static_cast<double>(t), alpha));
  }
  return acc.value();
}

inline double log_prefactor(double s, double q) {
  return 0.5 * s * specfn::kLn2 - (q == 1.0 ? 0.0 : s * std::log(q));
}

/// General slope-series kernel: sums the Beta series over the (n, m)
/// configurations of positive/negative surviving coordinates. Binomial
/// configurations when q = 1, trinomial otherwise.
inline KernelValue series_kernel(std::int64_t d, double s, const Activation& act, double q,
                                 const specfn::EvalBudget& budget) {
  const double alpha = 0.5 * s;
  const double rel_tol = budget.rel_tol;
  ::fracinit::detail::SlopeMoments slopes(act);
  const double neg_moment = act.slope_moment(s);  // E[a^s], all-negative orthant

  const double log_lower = log_chi_mixture(d, 0.5 * q, alpha);

  std::vector<double> lfact(static_cast<std::size_t>(d) + 1);
  for (std::int64_t i = 0; i <= d; ++i) lfact[i] = std::lgamma(static_cast<double>(i) + 1.0);

  const double n_configs = q == 1.0 ? static_cast<double>(d + 1)
                                    : 0.5 * static_cast<double>(d + 1) * static_cast<double>(d + 2);
  const double log_skip = log_lower + std::log(0.25 * rel_tol / n_configs);

  specfn::LogSumExp total;
  double rel_tail = 0.0;  // relative to exp(log_lower)
  std::int64_t terms = 0;

  auto visit = [&](std::int64_t n, std::int64_t m, double log_w) {
    const std::int64_t dof = n + m;
    if (dof == 0) return;
    const double log_chi = specfn::log_gamma_ratio(0.5 * static_cast<double>(dof), alpha);
    if (log_w + log_chi < log_skip) {
      rel_tail += std::exp(log_w + log_chi - log_lower);
      return;
    }
    if (n == 0) {
      total.add(log_w + log_chi + std::log(neg_moment));
      return;
    }
    auto sum = ::fracinit::detail::config_series(static_cast<long>(n), static_cast<long>(m), alpha,
                                                 slopes, 0.5 * rel_tol, budget.max_terms);
    terms += static_cast<std::int64_t>(sum.terms);
    total.add(log_w + std::log(sum.value));
    if (sum.tail > 0.0) rel_tail += std::exp(log_w + std::log(sum.tail) - log_lower);
  };

  if (q == 1.0) {
    for (std::int64_t n = 0; n <= d; ++n) {
      const double log_w = specfn::log_binomial_pmf(d, n, 0.5);
      visit(n, d - n, log_w);
    }
  } else {
    const double lhalf = std::log(0.5 * q);
    const double ldrop = std::log1p(-q);
    for (std::int64_t n = 0; n <= d; ++n) {
      for (std::int64_t m = 0; n + m <= d; ++m) {
        const std::int64_t r = d - n - m;
        const double log_w = lfact[d] - lfact[n] - lfact[m] - lfact[r] +
                             static_cast<double>(n + m) * lhalf + static_cast<double>(r) * ldrop;
        visit(n, m, log_w);
      }
    }
  }

  const double log_sum = total.value();
  const double tail = rel_tail * std::exp(log_lower - log_sum);
  if (!(tail <= rel_tol)) {
    throw BudgetExceeded("kernel tail bound exceeds rel_tol");
  }
  return make_kernel_value(log_prefactor(s, q) + log_sum, terms, tail);
}

inline void require_query(const MomentQuery& q) { q.validate(); }

inline KernelValue closed(double value) { return make_kernel_value(std::log(value), 1, 0.0); }

}  // namespace detail

/// I_1(s,d) = 2^{s/2} Gamma(d/2+s/2)/Gamma(d/2).
inline KernelValue linear_kernel(double s, std::int64_t d) {
  detail::require(s > 0.0 && s <= 8.0, "linear_kernel: s must lie in (0, 8]");
  detail::require(d >= 1, "linear_kernel: d must be >= 1");
  if (s == 2.0) return detail::closed(static_cast<double>(d));
  return make_kernel_value(
      detail::log_prefactor(s, 1.0) + specfn::log_gamma_ratio(0.5 * static_cast<double>(d), 0.5 * s), 1,
      0.0);
}

inline KernelValue relu_kernel(const MomentQuery& q) {
  detail::require_query(q);
  detail::require(!q.activation.is_randomized() && q.activation.slope() == 0.0,
                  "relu_kernel: activation must be ReLU");
  detail::require(q.q == 1.0, "relu_kernel: q must be 1 (use dropout_relu_kernel)");
  if (q.s == 2.0) return detail::closed(0.5 * static_cast<double>(q.d));
  return make_kernel_value(detail::log_prefactor(q.s, 1.0) + detail::log_chi_mixture(q.d, 0.5, 0.5 * q.s),
                           q.d, 0.0);
}

inline KernelValue dropout_relu_kernel(const MomentQuery& q) {
  detail::require_query(q);
  detail::require(!q.activation.is_randomized() && q.activation.slope() == 0.0,
                  "dropout_relu_kernel: activation must be ReLU");
  if (q.q == 1.0) return relu_kernel(q);
  if (q.s == 2.0) return detail::closed(0.5 * static_cast<double>(q.d) / q.q);
  return make_kernel_value(
      detail::log_prefactor(q.s, q.q) + detail::log_chi_mixture(q.d, 0.5 * q.q, 0.5 * q.s), q.d, 0.0);
}

inline KernelValue prelu_kernel(const MomentQuery& q) {
  detail::require_query(q);
  detail::require(!q.activation.is_randomized(), "prelu_kernel: slope must be fixed");
  const double a = q.activation.slope();
  detail::require(a > 0.0 && a < 1.0, "prelu_kernel: slope must lie in (0,1)");
  detail::require(q.q == 1.0, "prelu_kernel: q must be 1 (use dropout_prelu_kernel)");
  if (q.s == 2.0) return detail::closed(0.5 * (1.0 + a * a) * static_cast<double>(q.d));
  return detail::series_kernel(q.d, q.s, q.activation, 1.0, q.budget);
}

/// Linear activation with dropout: q^{-s} 2^{s/2} sum_t Bin(d,q)(t) Gamma(t/2+s/2)/Gamma(t/2).
inline KernelValue dropout_linear_kernel(double s, std::int64_t d, double q) {
  detail::require(s > 0.0 && s <= 8.0, "dropout_linear_kernel: s must lie in (0, 8]");
  detail::require(d >= 1, "dropout_linear_kernel: d must be >= 1");
  detail::require(q > 0.0 && q <= 1.0, "dropout_linear_kernel: q must lie in (0, 1]");
  if (q == 1.0) return linear_kernel(s, d);
  if (s == 2.0) return detail::closed(static_cast<double>(d) / q);
  return make_kernel_value(detail::log_prefactor(s, q) + detail::log_chi_mixture(d, q, 0.5 * s), d, 0.0);
}

inline KernelValue dropout_prelu_kernel(const MomentQuery& q) {
  detail::require_query(q);
  detail::require(!q.activation.is_randomized(), "dropout_prelu_kernel: slope must be fixed");
  const double a = q.activation.slope();
  detail::require(a > 0.0 && a <= 1.0, "dropout_prelu_kernel: slope must lie in (0,1]");
  if (q.q == 1.0) return a == 1.0 ? linear_kernel(q.s, q.d) : prelu_kernel(q);
  if (a == 1.0) return dropout_linear_kernel(q.s, q.d, q.q);
  if (q.s == 2.0) return detail::closed(0.5 * (1.0 + a * a) * static_cast<double>(q.d) / q.q);
  return detail::series_kernel(q.d, q.s, q.activation, q.q, q.budget);
}

/// Slope drawn uniformly from [lo, hi]: w_{k,n} replaced by its expectation.
/// A lower endpoint of 0 removes the geometric envelope; configurations with a
/// single positive coordinate and s <= 1 then cannot be certified and raise
/// BudgetExceeded.
inline KernelValue randomized_leaky_kernel(const MomentQuery& q) {
  detail::require_query(q);
  detail::require(q.activation.is_randomized(), "randomized_leaky_kernel: needs a slope interval");
  if (q.s == 2.0) {
    return detail::closed(0.5 * (1.0 + q.activation.slope_moment(2.0)) * static_cast<double>(q.d) / q.q);
  }
  return detail::series_kernel(q.d, q.s, q.activation, q.q, q.budget);
}

inline KernelValue kernel(const MomentQuery& q) {
  detail::require_query(q);
  if (q.activation.is_randomized()) return randomized_leaky_kernel(q);
  const double a = q.activation.slope();
  if (a == 0.0) return dropout_relu_kernel(q);
  if (a == 1.0) return dropout_linear_kernel(q.s, q.d, q.q);
  return dropout_prelu_kernel(q);
}

struct CriticalSigma {
  double sigma = 0.0;
  double sigma_sq = 0.0;
  KernelValue kernel;
};

/// sigma = I(s,d)^{-1/s}: the weight std dev that keeps E||x_k||^s constant.
inline CriticalSigma critical_sigma(const MomentQuery& q) {
  KernelValue kv = kernel(q);
  return {std::exp(-kv.log_I / q.s), std::exp(-2.0 * kv.log_I / q.s), kv};
}

/// Large-d expansion of the critical variance up to O(1/d^2). Branches:
/// a = 0 (any q), a = 1 (any q), 0 < a <= 0.1 with q = 1.
inline double asymptotic_sigma_sq(double s, std::int64_t d, double a, double q) {
  detail::require(s > 0.0 && s <= 2.0, "asymptotic_sigma_sq: s must lie in (0, 2]");
  detail::require(d >= 2, "asymptotic_sigma_sq: d must be >= 2");
  detail::require(a >= 0.0 && a <= 1.0, "asymptotic_sigma_sq: a must lie in [0,1]");
  detail::require(q > 0.0 && q <= 1.0, "asymptotic_sigma_sq: q must lie in (0,1]");
  const double dd = static_cast<double>(d);
  const double d2 = dd * dd;
  if (a == 0.0) return 2.0 * q / dd + (2.0 - s) * (6.0 - q) / (2.0 * d2);
  if (a == 1.0) return q / dd + (3.0 - q) * (2.0 - s) / (4.0 * d2);
  if (a <= 0.1 && q == 1.0) {
    const double a2 = a * a;
    return (2.0 / (1.0 + a2)) / dd + (5.0 - (12.0 - 2.5 * s) * a2) / (2.0 + (s + 2.0) * a2) * (2.0 - s) / d2;
  }
  throw Unsupported("no large-d expansion for this (a, q); use the exact kernel");
}

/// Predicted E||x_k||^s / ||x_0||^s after each layer, sigma^{sk} prod_j I(s, d_j).
inline std::vector<double> moment_trajectory(const std::vector<std::int64_t>& widths, double s,
                                             double sigma, const Activation& act, double q,
                                             const specfn::EvalBudget& budget = {}) {
  detail::require(!widths.empty(), "moment_trajectory: widths must be nonempty");
  detail::require(sigma > 0.0, "moment_trajectory: sigma must be positive");
  std::map<std::int64_t, double> cache;
  std::vector<double> out;
  out.reserve(widths.size());
  double log_ratio = 0.0;
  const double log_sigma_s = s * std::log(sigma);
  for (std::int64_t d : widths) {
    auto it = cache.find(d);
    if (it == cache.end()) {
      it = cache.emplace(d, kernel(MomentQuery{d, s, act, q, budget}).log_I).first;
    }
    log_ratio += log_sigma_s + it->second;
    out.push_back(std::exp(log_ratio));
  }
  return out;
}

/// Convolution layer with m x m filters and c channels acts like width m^2 c.
inline std::int64_t conv_effective_width(std::int64_t m, std::int64_t c) {
  detail::require(m >= 1 && c >= 1, "conv_effective_width: m and c must be >= 1");
  return m * m * c;
}

}  // namespace fracinit::kernels
