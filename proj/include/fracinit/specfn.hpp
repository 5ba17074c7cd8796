#pragma once

// Special functions in log space used by the moment kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "fracinit/errors.hpp"

namespace fracinit::specfn {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
inline constexpr double kLn2 = std::numbers::ln2;

/// Truncation policy shared by every infinite series in the library.
struct EvalBudget {
  double rel_tol = 1e-12;
  std::size_t max_terms = 1'000'000;

  void validate() const {
    detail::require(rel_tol > 0.0 && rel_tol < 1e-3,
                    "EvalBudget.rel_tol must lie in (0, 1e-3)");
    detail::require(max_terms >= 1, "EvalBudget.max_terms must be >= 1");
  }
};

namespace detail {

inline void require_positive(double x, const char* fn) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(fn) + ": argument must be positive and finite");
  }
}

}  // namespace detail

/// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
  detail::require_positive(x, "log_gamma");
  if (x == 1.0 || x == 2.0) return 0.0;
  return boost::math::lgamma(x);
}

inline double digamma(double x) {
  detail::require_positive(x, "digamma");
  return boost::math::digamma(x);
}

inline double trigamma(double x) {
  detail::require_positive(x, "trigamma");
  return boost::math::trigamma(x);
}

inline double log_beta(double x, double y) {
  detail::require_positive(x, "log_beta");
  detail::require_positive(y, "log_beta");
  return log_gamma(x) + log_gamma(y) - log_gamma(x + y);
}

/// ln[Gamma(x + h) / Gamma(x)], without differencing two large lgamma values.
inline double log_gamma_ratio(double x, double h) {
  detail::require_positive(x, "log_gamma_ratio");
  detail::require_positive(x + h, "log_gamma_ratio");
  if (h == 0.0) return 0.0;
  return -std::log(boost::math::tgamma_delta_ratio(x, h));
}

/// Generalized binomial coefficient prod_{i<k} (r - i) / k!, evaluated as a
/// product so that integer poles of Gamma never appear. (k-1 choose k) = 0.
inline double gen_binomial(double r, std::uint64_t k) {
  if (!std::isfinite(r)) throw DomainError("gen_binomial: r must be finite");
  double out = 1.0;
  for (std::uint64_t i = 0; i < k; ++i) {
    out *= (r - static_cast<double>(i)) / static_cast<double>(i + 1);
    if (out == 0.0) break;
  }
  return out;
}

inline double log_binomial_coefficient(std::int64_t d, std::int64_t n) {
  ::fracinit::detail::require(d >= 0 && n >= 0 && n <= d,
                              "log_binomial_coefficient: need 0 <= n <= d");
  if (n == 0 || n == d) return 0.0;
  return log_gamma(static_cast<double>(d) + 1.0) - log_gamma(static_cast<double>(n) + 1.0) -
         log_gamma(static_cast<double>(d - n) + 1.0);
}

/// ln[ C(d,n) p^n (1-p)^(d-n) ]. Boost's pdf is used where it is a normal
/// number (it avoids the cancellation of large lgamma differences); the
/// lgamma form covers the underflow region.
inline double log_binomial_pmf(std::int64_t d, std::int64_t n, double p) {
  ::fracinit::detail::require(d >= 1, "log_binomial_pmf: d must be >= 1");
  ::fracinit::detail::require(n >= 0 && n <= d, "log_binomial_pmf: need 0 <= n <= d");
  ::fracinit::detail::require(p > 0.0 && p < 1.0, "log_binomial_pmf: p must lie in (0,1)");
  const double direct = boost::math::pdf(
      boost::math::binomial_distribution<double>(static_cast<double>(d), p), static_cast<double>(n));
  if (direct > 1e-280) return std::log(direct);
  return log_binomial_coefficient(d, n) + static_cast<double>(n) * std::log(p) +
         static_cast<double>(d - n) * std::log1p(-p);
}

/// Streaming log-sum-exp accumulator for nonnegative terms given by their logs.
class LogSumExp {
 public:
  void add(double log_term) {
    if (log_term == -std::numeric_limits<double>::infinity()) return;
    if (log_term <= max_) {
      sum_ += std::exp(log_term - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    }
  }

  /// ln of the accumulated sum; -inf when nothing was added.
  double value() const {
    if (sum_ == 0.0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
  }

  bool empty() const { return sum_ == 0.0; }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

inline double log_sum_exp(std::span<const double> logs) {
  LogSumExp acc;
  for (double v : logs) acc.add(v);
  return acc.value();
}

}  // namespace fracinit::specfn
