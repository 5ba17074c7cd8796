#pragma once

// Which moment order a given sigma preserves, and what happens to ||x_k|| as
// k grows.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "fracinit/errors.hpp"
#include "fracinit/kernels.hpp"
#include "fracinit/lyapunov.hpp"
#include "fracinit/types.hpp"

namespace fracinit {

enum class Regime { Preserving, Contracting, Exploding };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Preserving: return "preserving";
    case Regime::Contracting: return "contracting";
    case Regime::Exploding: return "exploding";
  }
  return "?";
}

struct RegimeVerdict {
  Regime regime = Regime::Preserving;
  double ratio = 1.0;                    // sigma^s I(s,d) at the probe order
  std::optional<double> preserved_order; // s* with sigma^{s*} I(s*,d) = 1
  std::optional<double> mu;              // drift of log||x_k|| when available
};

inline constexpr double kMinOrder = 1e-6;
inline constexpr double kMaxOrder = 8.0;

namespace detail {

inline double log_kappa(double s, double log_sigma, std::int64_t d, const Activation& act, double q,
                        const specfn::EvalBudget& budget) {
  return s * log_sigma + kernels::kernel(MomentQuery{d, s, act, q, budget}).log_I;
}

}  // namespace detail

/// Nonzero root of kappa(s) = sigma^s I(s,d) = 1 on (1e-6, 8]. kappa is log-convex;
/// with a nonzero slope and no dropout kappa(0) = 1 and kappa'(0) = mu, so a
/// root exists iff mu < 0. With ReLU or dropout kappa(0+) < 1 and a root
/// always exists, possibly beyond 8.
inline std::optional<double> solve_preserved_order(double sigma, std::int64_t d, const Activation& act,
                                                   double q = 1.0, const specfn::EvalBudget& budget = {}) {
  ::fracinit::detail::require(sigma > 0.0 && std::isfinite(sigma), "solve_preserved_order: sigma must be positive");
  ::fracinit::detail::require(d >= 1, "solve_preserved_order: d must be >= 1");
  ::fracinit::detail::require(q > 0.0 && q <= 1.0, "solve_preserved_order: q must lie in (0,1]");
  const double log_sigma = std::log(sigma);
  const bool always_root = q < 1.0 || (!act.is_randomized() && act.slope() == 0.0);
  if (!always_root) {
    const double mu = lyapunov::drift(sigma, d, act, budget);
    if (mu >= 0.0) return std::nullopt;
  }
  auto g = [&](double s) { return detail::log_kappa(s, log_sigma, d, act, q, budget); };

  double lo = kMinOrder;
  double g_lo = g(lo);
  if (g_lo >= 0.0) return kMinOrder;  // root lies at or below the smallest order we resolve
  double hi = lo, g_hi = g_lo;
  for (double s : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    hi = s;
    g_hi = g(s);
    if (g_hi >= 0.0) break;
    lo = s;
    g_lo = g_hi;
  }
  if (g_hi < 0.0) {
    throw NoConvergence("solve_preserved_order: kappa(s) < 1 on all of (0, 8]");
  }
  if (g_hi == 0.0) return hi;
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-13 * std::max(1.0, std::abs(a)); };
  auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, g_lo, g_hi, tol, iters);
  if (iters >= 200) throw NoConvergence("solve_preserved_order: root finder did not converge");
  return 0.5 * (a + b);
}

/// Compares sigma^s I(s,d) with 1 at the probe order q.s in (0, 2].
inline RegimeVerdict classify_regime(double sigma, const MomentQuery& query) {
  query.validate();
  ::fracinit::detail::require(sigma > 0.0 && std::isfinite(sigma), "classify_regime: sigma must be positive");
  ::fracinit::detail::require(query.s <= 2.0, "classify_regime: probe order must lie in (0, 2]");
  RegimeVerdict v;
  v.ratio = std::exp(query.s * std::log(sigma) + kernels::kernel(query).log_I);
  constexpr double tol = 1e-9;
  if (std::abs(v.ratio - 1.0) <= tol) {
    v.regime = Regime::Preserving;
    v.preserved_order = query.s;
  } else {
    v.regime = v.ratio < 1.0 ? Regime::Contracting : Regime::Exploding;
    try {
      v.preserved_order = solve_preserved_order(sigma, query.d, query.activation, query.q, query.budget);
    } catch (const NoConvergence&) {
      v.preserved_order.reset();
    }
  }
  const bool has_mu = query.q == 1.0 &&
                      (!query.activation.is_randomized() || query.activation.interval().lo > 0.0);
  if (has_mu) v.mu = lyapunov::drift(sigma, query.d, query.activation, query.budget);
  return v;
}

enum class LimitKind { ZeroAlmostSure, ZeroLimit, InfinityLimit, Critical };

inline const char* to_string(LimitKind k) {
  switch (k) {
    case LimitKind::ZeroAlmostSure: return "zero_almost_sure";
    case LimitKind::ZeroLimit: return "zero_limit";
    case LimitKind::InfinityLimit: return "infinity_limit";
    case LimitKind::Critical: return "critical";
  }
  return "?";
}

struct LimitVerdict {
  LimitKind kind = LimitKind::ZeroAlmostSure;
  std::optional<double> mu;
  std::optional<double> preserved_order;
  /// For ZeroLimit: true when s* >= 1 (the whole sequence converges a.s.);
  /// otherwise convergence is in L_p with an a.s. convergent subsequence.
  bool almost_sure = false;
};

/// Limit of ||x_k|| as k -> infinity.
inline LimitVerdict as_limit(double sigma, std::int64_t d, const Activation& act, double q = 1.0,
                             const specfn::EvalBudget& budget = {}) {
  ::fracinit::detail::require(sigma > 0.0 && std::isfinite(sigma), "as_limit: sigma must be positive");
  ::fracinit::detail::require(q > 0.0 && q <= 1.0, "as_limit: q must lie in (0,1]");
  LimitVerdict v;
  // ReLU orthant absorption, or an all-dropped layer: P(x_k = 0) -> 1.
  if (q < 1.0 || (!act.is_randomized() && act.slope() == 0.0)) {
    v.kind = LimitKind::ZeroAlmostSure;
    v.almost_sure = true;
    return v;
  }
  const double mu = lyapunov::drift(sigma, d, act, budget);
  v.mu = mu;
  if (std::abs(mu) <= 1e-10) {
    v.kind = LimitKind::Critical;
  } else if (mu > 0.0) {
    v.kind = LimitKind::InfinityLimit;
  } else {
    v.kind = LimitKind::ZeroLimit;
    try {
      v.preserved_order = solve_preserved_order(sigma, d, act, q, budget);
    } catch (const NoConvergence&) {
      v.preserved_order.reset();
    }
    v.almost_sure = !v.preserved_order || *v.preserved_order >= 1.0;
  }
  return v;
}

}  // namespace fracinit
