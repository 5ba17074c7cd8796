#pragma once

// Test-side oracles that share no code path with the library's series:
// quadrature of the Laplace-transform representation of E[R^alpha] and
// E[ln R] for R = chi2_n + a^2 chi2_m, plus a tiny case generator for the
// property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace oracle {

using Real = long double;

template <class F>
Real head_integral(F f) {
  // tanh-sinh copes with the integrable t^{-alpha} singularity at 0
  boost::math::quadrature::tanh_sinh<Real> ts;
  return ts.integrate([&](Real t) { return t > 0 ? f(t) : Real(0); }, Real(0), Real(1));
}

inline Real log_laplace(Real t, int n, int m, Real a2) {
  return -Real(n) / 2 * std::log1p(2 * t) - Real(m) / 2 * std::log1p(2 * a2 * t);
}

inline Real laplace(Real t, int n, int m, Real a2) { return std::exp(log_laplace(t, n, m, a2)); }

/// (1 - e^x) t^p for x <= 0, kept finite for t down to the denormal range.
inline Real one_minus_exp_times_pow(Real x, Real t, Real p) {
  const Real v = -std::expm1(x);
  if (v <= 0) return 0;
  return std::exp(std::log(v) + p * std::log(t));
}

/// E[(chi2_n + a^2 chi2_m)^alpha], 0 < alpha < 2, alpha != 1.
inline Real chi_moment(int n, int m, Real a, Real alpha) {
  const Real a2 = a * a;
  if (n + m == 0) return 0;
  if (m == 0 || a2 == 0) {
    if (n == 0) return 0;
    return std::pow(Real(2), alpha) * std::tgamma(Real(n) / 2 + alpha) / std::tgamma(Real(n) / 2);
  }
  boost::math::quadrature::exp_sinh<Real> es;
  if (alpha < 1) {
    // x^alpha = alpha/Gamma(1-alpha) int (1 - e^{-tx}) t^{-alpha-1} dt
    auto f = [&](Real t) { return one_minus_exp_times_pow(log_laplace(t, n, m, a2), t, -alpha - 1); };
    const Real head = head_integral(f);
    const Real tail = es.integrate([&](Real u) { return f(1 + u); });
    return alpha / std::tgamma(1 - alpha) * (head + tail);
  }
  // x^{1+b} = b/Gamma(1-b) int (x - x e^{-tx}) t^{-b-1} dt, and
  // E[R - R e^{-tR}] = n (1 - L/(1+2t)) + m a^2 (1 - L/(1+2a^2 t)).
  const Real b = alpha - 1;
  auto f = [&](Real t) {
    const Real lL = log_laplace(t, n, m, a2);
    Real v = n * one_minus_exp_times_pow(lL - std::log1p(2 * t), t, -b - 1);
    if (m > 0) v += m * a2 * one_minus_exp_times_pow(lL - std::log1p(2 * a2 * t), t, -b - 1);
    return v;
  };
  const Real head = head_integral(f);
  const Real tail = es.integrate([&](Real u) { return f(1 + u); });
  return b / std::tgamma(1 - b) * (head + tail);
}

/// E[ln(chi2_n + a^2 chi2_m)] from ln x = int_0^inf (e^{-t} - e^{-xt}) / t dt.
inline Real chi_log_mean(int n, int m, Real a) {
  const Real a2 = a * a;
  auto f = [&](Real t) { return (std::exp(-t) - laplace(t, n, m, a2)) / t; };
  const Real head = head_integral(f);
  boost::math::quadrature::exp_sinh<Real> es;
  const Real tail = es.integrate([&](Real u) { return f(1 + u); });
  return head + tail;
}

/// PReLU kernel with dropout by explicit configuration sums of chi_moment.
inline Real prelu_kernel(Real a, Real s, int d, Real q = 1) {
  const Real alpha = s / 2;
  Real total = 0;
  if (q == 1) {
    for (int n = 0; n <= d; ++n) {
      total += boost::math::binomial_coefficient<Real>(d, n) * std::pow(Real(2), -d) * chi_moment(n, d - n, a, alpha);
    }
    return total;
  }
  for (int n = 0; n <= d; ++n) {
    for (int m = 0; n + m <= d; ++m) {
      const Real p = boost::math::binomial_coefficient<Real>(d, n) *
                     boost::math::binomial_coefficient<Real>(d - n, m) * std::pow(q / 2, n + m) *
                     std::pow(1 - q, d - n - m);
      total += p * chi_moment(n, m, a, alpha);
    }
  }
  return total / std::pow(q, s);
}

/// Unconditional drift of ln(||x_{k+1}||/||x_k||) at sigma = 1 for slope a > 0.
inline Real prelu_drift(Real a, int d) {
  Real total = 0;
  for (int n = 0; n <= d; ++n) {
    total += boost::math::binomial_coefficient<Real>(d, n) * std::pow(Real(2), -d) * chi_log_mean(n, d - n, a);
  }
  return total / 2;
}

/// Deterministic case generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(eng_);
  }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(v.size()) - 1))];
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace oracle
