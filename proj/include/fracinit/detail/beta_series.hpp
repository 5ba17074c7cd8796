#pragma once

// Shared engine for the slope series. For a configuration with n positive and
// m negative coordinates (D = n + m), alpha = s/2, the normalized k-th term is
//
//   t_k = 1/2 [ rho_k n C(m/2+k-1, k) + tau_k m C(m/2+k, k) ] (1-alpha)_k G(D/2+alpha) / G(k+1+D/2)
//
// with rho_k = E[(1-a^2)^k], tau_k = E[a^2 (1-a^2)^k]. Sum_k t_k equals
// E[(chi2_n + a^2 chi2_m)^alpha] / 2^alpha. At alpha = 0 the terms are
// w_{k,n} B(k+1, D/2) and sum to one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fracinit/errors.hpp"
#include "fracinit/specfn.hpp"
#include "fracinit/types.hpp"

namespace fracinit::detail {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// rho_k and tau_k for a fixed or uniformly distributed slope, cached by k.
class SlopeMoments {
 public:
  explicit SlopeMoments(const Activation& act) {
    if (act.is_randomized()) {
      randomized_ = true;
      lo_ = act.interval().lo;
      hi_ = act.interval().hi;
    } else {
      lo_ = hi_ = act.slope();
    }
    ratio_ = 1.0 - lo_ * lo_;
    decay_ = -std::log1p(-lo_ * lo_);
    rho_.push_back(1.0);
    if (!randomized_) {
      tau_.push_back(lo_ * lo_);
    } else {
      f_next_ = next_f(1, 1.0);
      tau_.push_back(g_from(0, 1.0));
    }
  }

  /// sup_k rho_{k+1}/rho_k (also bounds tau_{k+1}/tau_k).
  double ratio() const { return ratio_; }
  /// -ln ratio(); +inf for a slope of 1.
  double decay() const { return decay_; }

  double rho(std::size_t k) {
    extend(k);
    return rho_[k];
  }
  double tau(std::size_t k) {
    extend(k);
    return tau_[k];
  }

 private:
  // [a (1-a^2)^k]_lo^hi / (hi - lo), evaluated through log differences so a
  // narrow interval does not cancel.
  double bracket(std::size_t k) const {
    const double kk = static_cast<double>(k);
    const double w = hi_ - lo_;
    auto g = [kk](double a) {
      if (a == 0.0) return 0.0;
      if (a == 1.0) return kk == 0.0 ? 1.0 : 0.0;
      return a * std::exp(kk * std::log1p(-a * a));
    };
    if (lo_ == 0.0 || hi_ == 1.0) return (g(hi_) - g(lo_)) / w;
    const double glo = g(lo_);
    const double dlog = std::log1p(w / lo_) + kk * std::log1p(-w * (hi_ + lo_) / (1.0 - lo_ * lo_));
    return glo * std::expm1(dlog) / w;
  }

  double next_f(std::size_t k, double f_prev) const {
    const double kk = static_cast<double>(k);
    return (bracket(k) + 2.0 * kk * f_prev) / (2.0 * kk + 1.0);
  }

  double g_from(std::size_t k, double f_k) const {
    return (f_k - bracket(k + 1)) / (2.0 * static_cast<double>(k) + 3.0);
  }

  void extend(std::size_t k) {
    while (rho_.size() <= k) {
      const std::size_t j = rho_.size();
      if (!randomized_) {
        rho_.push_back(rho_.back() * ratio_);
        tau_.push_back(tau_.back() * ratio_);
      } else {
        const double f = f_next_;
        rho_.push_back(f);
        tau_.push_back(g_from(j, f));
        f_next_ = next_f(j + 1, f);
      }
    }
  }

  bool randomized_ = false;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double ratio_ = 1.0;
  double decay_ = 0.0;
  double f_next_ = 0.0;
  std::vector<double> rho_;
  std::vector<double> tau_;
};

/// Iterates the two components of t_k for one (n, m) configuration.
class BetaTerms {
 public:
  BetaTerms(long n, long m, double alpha, SlopeMoments& slopes)
      : n_(static_cast<double>(n)),
        m_(static_cast<double>(m)),
        alpha_(alpha),
        half_dof_(0.5 * static_cast<double>(n + m)),
        slopes_(slopes) {
    const double base = boost::math::tgamma_ratio(half_dof_ + alpha_, half_dof_ + 1.0);
    coef_a_ = base;
    coef_b_ = base;
    refresh();
  }

  std::size_t k() const { return k_; }
  double part_a() const { return part_a_; }
  double part_b() const { return part_b_; }
  double term() const { return part_a_ + part_b_; }

  void advance() {
    const double kk = static_cast<double>(k_);
    const double beta_ratio = (kk + 1.0 - alpha_) / (kk + 1.0 + half_dof_);
    coef_a_ *= (0.5 * m_ + kk) / (kk + 1.0) * beta_ratio;
    coef_b_ *= (0.5 * m_ + kk + 1.0) / (kk + 1.0) * beta_ratio;
    ++k_;
    refresh();
  }

  /// True once every later term ratio obeys the envelopes used by tail_bound.
  bool envelope_valid() const { return static_cast<double>(k_) + 1.0 >= alpha_; }

  /// Upper bound on sum_{j>k} |part_a_j| + |part_b_j|. Each component's term
  /// ratio is at most r (1 - c/(j+b)), so the tail is at most
  /// T_k sum_{i>=1} r^i ((k+b)/(k+b+i))^c; three bounds on that sum are tried.
  double tail_bound() const {
    if (!envelope_valid()) return std::numeric_limits<double>::infinity();
    const double b = 1.0 + half_dof_;
    return std::abs(part_a_) * factor(0.5 * n_ + 1.0 + alpha_, b) +
           std::abs(part_b_) * factor(0.5 * n_ + alpha_, b);
  }

  /// Geometric-only factor r/(1-r); used by the weighted (log-moment) sums.
  double geometric_factor() const {
    const double r = slopes_.ratio();
    return r < 1.0 ? r / (1.0 - r) : std::numeric_limits<double>::infinity();
  }

 private:
  double factor(double c, double b) const {
    const double r = slopes_.ratio();
    const double kb = static_cast<double>(k_) + b;
    double f = std::numeric_limits<double>::infinity();
    if (r < 1.0) f = r / (1.0 - r);
    if (c > 1.0) f = std::min(f, kb / (c - 1.0));
    // integral bound kb * int_0^inf e^{-lambda kb t} (1+t)^{-c} dt
    //   = kb e^x x^{c-1} Gamma(1-c, x),  x = lambda kb
    const double x = slopes_.decay() * kb;
    if (c <= 1.0 && x > 0.0 && x < 500.0) {
      const double g = c == 1.0 ? boost::math::expint(1, x) : boost::math::tgamma(1.0 - c, x);
      f = std::min(f, kb * std::exp(x) * std::pow(x, c - 1.0) * g);
    }
    return f;
  }

  void refresh() {
    part_a_ = n_ == 0.0 ? 0.0 : 0.5 * n_ * slopes_.rho(k_) * coef_a_;
    part_b_ = m_ == 0.0 ? 0.0 : 0.5 * m_ * slopes_.tau(k_) * coef_b_;
  }

  double n_, m_, alpha_, half_dof_;
  SlopeMoments& slopes_;
  std::size_t k_ = 0;
  double coef_a_ = 0.0;
  double coef_b_ = 0.0;
  double part_a_ = 0.0;
  double part_b_ = 0.0;
};

struct SeriesSum {
  double value = 0.0;
  double tail = 0.0;  // absolute bound on the omitted terms
  std::size_t terms = 0;
};

/// Sum_k t_k for one configuration, stopped once the certified tail is below
/// rel_target times the (tail-corrected) partial sum.
inline SeriesSum config_series(long n, long m, double alpha, SlopeMoments& slopes,
                               double rel_target, std::size_t max_terms) {
  BetaTerms t(n, m, alpha, slopes);
  CompensatedSum acc;
  for (std::size_t count = 1;; ++count) {
    acc.add(t.term());
    if (t.envelope_valid()) {
      const double tail = t.tail_bound();
      const double partial = acc.value();
      if (tail <= rel_target * (partial - tail)) return {partial, tail, count};
      if (t.part_a() == 0.0 && t.part_b() == 0.0) return {partial, 0.0, count};
    }
    if (count >= max_terms) {
      throw BudgetExceeded("slope series (n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                           ") not certified within " + std::to_string(max_terms) + " terms");
    }
    t.advance();
  }
}

/// Weighted sums over u_k = w_{k,n} B(k+1, D/2) (the alpha = 0 terms):
///   norm = sum u_k, psi_mean = sum u_k b_k, psi_sq = sum u_k b_k^2,
///   tri = sum u_k (psi_1(k+1) - psi_1(1)), with b_k = psi_0(D/2) - psi_0(k+1).
struct LogSeries {
  double norm = 0.0;
  double mean_b = 0.0;
  double mean_b2 = 0.0;
  double tri = 0.0;
  double tail_norm = 0.0;
  double tail_b = 0.0;
  double tail_b2 = 0.0;
  double tail_tri = 0.0;
  std::size_t terms = 0;
};

inline LogSeries log_series(long n, long m, SlopeMoments& slopes, double abs_target,
                            std::size_t max_terms) {
  const double half_dof = 0.5 * static_cast<double>(n + m);
  const double psi_half = specfn::digamma(half_dof);
  // |b_k| <= c + ln(k+1): psi_0(k+1) lies in [-gamma, ln(k+1)].
  const double c = std::abs(psi_half) + specfn::kEulerGamma;
  const double psi1_one = std::numbers::pi * std::numbers::pi / 6.0;

  BetaTerms t(n, m, 0.0, slopes);
  CompensatedSum norm, sb, sb2, stri;
  CompensatedSum harmonic;   // H_k, so psi_0(k+1) = -gamma + H_k
  CompensatedSum harmonic2;  // sum_{j<=k} 1/j^2 = psi_1(1) - psi_1(k+1)
  const double r = slopes.ratio();
  LogSeries out;
  for (std::size_t count = 1;; ++count) {
    const std::size_t k = t.k();
    if (k > 0) {
      const double kk = static_cast<double>(k);
      harmonic.add(1.0 / kk);
      harmonic2.add(1.0 / (kk * kk));
    }
    const double bk = psi_half + specfn::kEulerGamma - harmonic.value();
    const double u = t.term();
    norm.add(u);
    sb.add(u * bk);
    sb2.add(u * bk * bk);
    stri.add(-u * harmonic2.value());

    const double uk = std::abs(t.part_a()) + std::abs(t.part_b());
    if (uk == 0.0 && k > 0) {
      out.tail_norm = out.tail_b = out.tail_b2 = out.tail_tri = 0.0;
      out.terms = count;
      break;
    }
    if (r < 1.0) {
      // Sum_{j>=1} r^j (C + j/(K+1))^p with C = c + ln(K+1), p = 0, 1, 2.
      const double g1 = r / (1.0 - r);
      const double g2 = r / ((1.0 - r) * (1.0 - r));
      const double g3 = r * (1.0 + r) / ((1.0 - r) * (1.0 - r) * (1.0 - r));
      const double C = c + std::log(static_cast<double>(k) + 1.0);
      const double inv = 1.0 / (static_cast<double>(k) + 1.0);
      out.tail_norm = uk * g1;
      out.tail_b = uk * (C * g1 + inv * g2);
      out.tail_b2 = uk * (C * C * g1 + 2.0 * C * inv * g2 + inv * inv * g3);
      out.tail_tri = uk * psi1_one * g1;
      const double scale = std::max(1.0, std::abs(sb.value()));
      if (out.tail_norm <= abs_target && out.tail_b <= abs_target * scale &&
          out.tail_b2 <= abs_target * std::max(1.0, sb2.value()) && out.tail_tri <= abs_target) {
        out.terms = count;
        break;
      }
    }
    if (count >= max_terms) {
      throw BudgetExceeded("log-moment series (n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                           ") not certified within " + std::to_string(max_terms) + " terms");
    }
    t.advance();
  }
  out.norm = norm.value();
  out.mean_b = sb.value();
  out.mean_b2 = sb2.value();
  out.tri = stri.value();
  return out;
}

}  // namespace fracinit::detail
