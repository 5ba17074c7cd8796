#pragma once

// Monte Carlo forward propagation through random fully connected layers
//   x_k = phi_a(W_k x_{k-1}) * eps_k / q  (+ noise)
// with i.i.d. N(0, sigma^2) weights, and the estimators that confront the
// kernel and Lyapunov predictions.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "fracinit/errors.hpp"
#include "fracinit/lyapunov.hpp"
#include "fracinit/rng.hpp"
#include "fracinit/statistics.hpp"
#include "fracinit/types.hpp"

namespace fracinit::sim {

enum class InputKind { Basis1, RandomUnit, Explicit };

/// Dense draws the full weight matrix. Projected uses W x ~ sigma ||x|| z,
/// exact in law because each W is fresh and independent of x. NormChain
/// tracks only ||x|| for the linear activation:
/// ||x'||^2 = (sigma^2 ||x||^2 + noise^2) chi2_d.
enum class Mode { Dense, Projected, NormChain };

inline constexpr double kDefaultMaxCells = 2e11;

inline double max_cells_from_env() {
  if (const char* v = std::getenv("FRACINIT_MAX_CELLS")) {
    char* end = nullptr;
    const double x = std::strtod(v, &end);
    if (end != v && x > 0.0) return x;
  }
  return kDefaultMaxCells;
}

struct ForwardConfig {
  /// Output width of each layer; a single entry means every layer has that width.
  std::vector<std::int64_t> widths{64};
  /// Width of x_0; 0 means "same as the first layer".
  std::int64_t input_width = 0;
  std::int64_t layers = 1;
  Activation activation{};
  double sigma = 1.0;
  double q = 1.0;
  double noise_std = 0.0;
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> checkpoints{};  // empty: every layer
  InputKind x0_kind = InputKind::Basis1;
  std::vector<double> x0{};  // used when x0_kind == Explicit
  unsigned workers = 0;      // 0: hardware concurrency
  Mode mode = Mode::Dense;
  double max_cells = 0.0;  // 0: FRACINIT_MAX_CELLS or the built-in default

  std::int64_t width_at(std::int64_t layer) const {
    return widths.size() == 1 ? widths[0] : widths[static_cast<std::size_t>(layer - 1)];
  }
  std::int64_t input_dim() const {
    if (x0_kind == InputKind::Explicit) return static_cast<std::int64_t>(x0.size());
    return input_width > 0 ? input_width : widths.front();
  }
  std::vector<std::int64_t> resolved_checkpoints() const {
    if (!checkpoints.empty()) return checkpoints;
    std::vector<std::int64_t> all(static_cast<std::size_t>(layers));
    for (std::int64_t k = 1; k <= layers; ++k) all[static_cast<std::size_t>(k - 1)] = k;
    return all;
  }

  /// Weight draws needed (trials * sum_j d_j d_{j-1} for Dense).
  double cells() const {
    double per_trial = 0.0;
    double prev = static_cast<double>(input_dim());
    for (std::int64_t k = 1; k <= layers; ++k) {
      const double d = static_cast<double>(width_at(k));
      per_trial += mode == Mode::Dense ? d * prev : d;
      prev = d;
    }
    return per_trial * static_cast<double>(trials);
  }

  void validate() const {
    using detail::require;
    require(!widths.empty(), "ForwardConfig.widths must be nonempty");
    for (auto d : widths) require(d >= 1, "ForwardConfig.widths entries must be >= 1");
    require(layers >= 1, "ForwardConfig.layers must be >= 1");
    require(widths.size() == 1 || static_cast<std::int64_t>(widths.size()) == layers,
            "ForwardConfig.widths must have one entry or one per layer");
    require(trials >= 1, "ForwardConfig.trials must be >= 1");
    require(sigma > 0.0 && std::isfinite(sigma), "ForwardConfig.sigma must be positive");
    require(q > 0.0 && q <= 1.0, "ForwardConfig.q must lie in (0,1]");
    require(noise_std >= 0.0 && std::isfinite(noise_std), "ForwardConfig.noise_std must be >= 0");
    if (noise_std > 0.0) {
      if (activation.is_randomized() || activation.slope() != 1.0) {
        throw ScopeError("additive noise is only modelled for the linear activation");
      }
    }
    if (mode == Mode::NormChain) {
      require(!activation.is_randomized() && activation.slope() == 1.0 && q == 1.0,
              "NormChain mode needs the linear activation without dropout");
      require(widths.size() == 1, "NormChain mode needs a constant width");
    }
    auto cps = resolved_checkpoints();
    for (std::size_t i = 0; i < cps.size(); ++i) {
      require(cps[i] >= 1 && cps[i] <= layers, "checkpoints must lie in [1, layers]");
      if (i > 0) require(cps[i] > cps[i - 1], "checkpoints must be strictly increasing");
    }
    if (x0_kind == InputKind::Explicit) {
      require(!x0.empty(), "explicit x0 must be nonempty");
      double n2 = 0.0;
      for (double v : x0) n2 += v * v;
      require(n2 > 0.0 && std::isfinite(n2), "explicit x0 must be a finite nonzero vector");
    }
    const double budget = max_cells > 0.0 ? max_cells : max_cells_from_env();
    if (cells() > budget) {
      throw ResourceLimit("simulation needs " + std::to_string(cells()) + " weight draws, budget is " +
                          std::to_string(budget));
    }
  }
};

/// Per-checkpoint log(||x_k|| / ||x_0||) for every trial; -inf marks x_k = 0.
struct EnsembleStats {
  std::vector<std::int64_t> checkpoints;
  std::int64_t trials = 0;
  double log_x0_norm = 0.0;
  std::vector<std::vector<double>> log_ratio;  // [checkpoint][trial]
  std::vector<std::int64_t> zero_count;

  std::size_t index_of(std::int64_t checkpoint) const {
    auto it = std::find(checkpoints.begin(), checkpoints.end(), checkpoint);
    if (it == checkpoints.end()) {
      throw DomainError("checkpoint " + std::to_string(checkpoint) + " was not recorded");
    }
    return static_cast<std::size_t>(it - checkpoints.begin());
  }
  const std::vector<double>& samples(std::int64_t checkpoint) const {
    return log_ratio[index_of(checkpoint)];
  }
  /// Finite samples only (conditional on a nonzero output).
  std::vector<double> nonzero_samples(std::int64_t checkpoint) const {
    std::vector<double> out;
    for (double v : samples(checkpoint)) {
      if (std::isfinite(v)) out.push_back(v);
    }
    return out;
  }
};

namespace detail {

using ::fracinit::detail::require;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline std::vector<double> initial_input(const ForwardConfig& cfg) {
  const std::int64_t d0 = cfg.input_dim();
  std::vector<double> x;
  switch (cfg.x0_kind) {
    case InputKind::Basis1:
      x.assign(static_cast<std::size_t>(d0), 0.0);
      x[0] = 1.0;
      break;
    case InputKind::Explicit:
      x = cfg.x0;
      break;
    case InputKind::RandomUnit: {
      auto eng = rng::make_stream(cfg.seed, ~std::uint64_t{0}, rng::StreamKind::Input);
      boost::random::normal_distribution<double> normal;
      x.resize(static_cast<std::size_t>(d0));
      double n2 = 0.0;
      do {
        n2 = 0.0;
        for (double& v : x) {
          v = normal(eng);
          n2 += v * v;
        }
      } while (n2 == 0.0);
      const double inv = 1.0 / std::sqrt(n2);
      for (double& v : x) v *= inv;
      break;
    }
  }
  return x;
}

inline double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

/// One trial; writes one value per checkpoint into out[cp * stride].
inline void run_trial(const ForwardConfig& cfg, const std::vector<std::int64_t>& cps,
                      const std::vector<double>& x0, double log_x0, std::uint64_t trial, double* out,
                      std::size_t stride) {
  auto w_eng = rng::make_stream(cfg.seed, trial, rng::StreamKind::Weights);
  auto m_eng = rng::make_stream(cfg.seed, trial, rng::StreamKind::Mask);
  auto n_eng = rng::make_stream(cfg.seed, trial, rng::StreamKind::Noise);
  auto a_eng = rng::make_stream(cfg.seed, trial, rng::StreamKind::Slope);
  boost::random::normal_distribution<double> normal;
  std::bernoulli_distribution keep(cfg.q);
  const bool noisy = cfg.noise_std > 0.0;
  const bool dropout = cfg.q < 1.0;
  const double inv_q = 1.0 / cfg.q;

  std::size_t next_cp = 0;
  auto record = [&](std::int64_t layer, double value) {
    while (next_cp < cps.size() && cps[next_cp] == layer) {
      out[next_cp * stride] = value;
      ++next_cp;
    }
  };
  auto record_zero_rest = [&]() {
    for (; next_cp < cps.size(); ++next_cp) out[next_cp * stride] = kNegInf;
  };

  if (cfg.mode == Mode::NormChain) {
    const double d = static_cast<double>(cfg.widths[0]);
    boost::random::chi_squared_distribution<double> chi2(d);
    const double s2 = cfg.sigma * cfg.sigma, v2 = cfg.noise_std * cfg.noise_std;
    double norm_sq = std::exp(2.0 * log_x0);
    for (std::int64_t k = 1; k <= cfg.layers && next_cp < cps.size(); ++k) {
      norm_sq = (s2 * norm_sq + v2) * chi2(w_eng);
      if (norm_sq == 0.0) {
        record_zero_rest();
        return;
      }
      record(k, 0.5 * std::log(norm_sq) - log_x0);
    }
    return;
  }

  // Without noise x is kept at unit norm and the scale is accumulated in logs.
  std::vector<double> x = x0;
  double log_scale = 0.0;
  if (!noisy) {
    const double n = norm2(x);
    for (double& v : x) v /= n;
  }
  std::vector<double> h;
  const auto& act = cfg.activation;
  for (std::int64_t k = 1; k <= cfg.layers && next_cp < cps.size(); ++k) {
    const std::size_t d_out = static_cast<std::size_t>(cfg.width_at(k));
    h.assign(d_out, 0.0);
    if (cfg.mode == Mode::Dense) {
      for (std::size_t i = 0; i < d_out; ++i) {
        double acc = 0.0;
        for (double xv : x) acc += normal(w_eng) * xv;
        h[i] = cfg.sigma * acc;
      }
    } else {
      const double scale = cfg.sigma * norm2(x);
      for (std::size_t i = 0; i < d_out; ++i) h[i] = scale * normal(w_eng);
    }
    double a = 0.0;
    if (act.is_randomized()) {
      std::uniform_real_distribution<double> slope(act.interval().lo, act.interval().hi);
      a = slope(a_eng);
    } else {
      a = act.slope();
    }
    if (a != 1.0) {
      for (double& v : h) {
        if (v < 0.0) v *= a;
      }
    }
    if (dropout) {
      for (double& v : h) v = keep(m_eng) ? v * inv_q : 0.0;
    }
    if (noisy) {
      for (double& v : h) v += cfg.noise_std * normal(n_eng);
    }
    x.swap(h);
    const double n = norm2(x);
    if (n == 0.0) {
      record_zero_rest();
      return;
    }
    if (noisy) {
      record(k, std::log(n) - log_x0);
    } else {
      log_scale += std::log(n);
      const double inv = 1.0 / n;
      for (double& v : x) v *= inv;
      record(k, log_scale);
    }
  }
}

}  // namespace detail

/// Runs cfg.trials independent forward passes. Results depend only on
/// (seed, config): each trial owns its random streams and its output slots.
inline EnsembleStats run_ensemble(const ForwardConfig& cfg) {
  cfg.validate();
  const auto cps = cfg.resolved_checkpoints();
  const auto x0 = detail::initial_input(cfg);
  const double log_x0 = std::log(detail::norm2(x0));
  const std::size_t n_trials = static_cast<std::size_t>(cfg.trials);

  std::vector<double> flat(cps.size() * n_trials, detail::kNegInf);
  unsigned workers = cfg.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_trials));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    constexpr std::size_t chunk = 16;
    for (;;) {
      const std::size_t start = next.fetch_add(chunk);
      if (start >= n_trials) return;
      const std::size_t stop = std::min(n_trials, start + chunk);
      for (std::size_t t = start; t < stop; ++t) {
        detail::run_trial(cfg, cps, x0, log_x0, t, flat.data() + t, n_trials);
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  EnsembleStats st;
  st.checkpoints = cps;
  st.trials = cfg.trials;
  st.log_x0_norm = log_x0;
  st.log_ratio.resize(cps.size());
  st.zero_count.assign(cps.size(), 0);
  for (std::size_t c = 0; c < cps.size(); ++c) {
    st.log_ratio[c].assign(flat.begin() + static_cast<std::ptrdiff_t>(c * n_trials),
                           flat.begin() + static_cast<std::ptrdiff_t>((c + 1) * n_trials));
    for (double v : st.log_ratio[c]) {
      if (v == detail::kNegInf) ++st.zero_count[c];
    }
  }
  return st;
}

struct Estimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Sample mean of (||x_k||/||x_0||)^s, zeros contributing 0, with the
/// standard error sd/sqrt(n).
inline Estimate estimate_moment(const EnsembleStats& st, double s, std::int64_t checkpoint) {
  detail::require(s > 0.0, "estimate_moment: s must be positive");
  const auto& x = st.samples(checkpoint);
  if (x.size() < 100) throw InsufficientSamples("estimate_moment needs at least 100 trials");
  double shift = detail::kNegInf;
  for (double v : x) shift = std::max(shift, s * v);
  if (shift == detail::kNegInf) return {0.0, 0.0};
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::exp(s * x[i] - shift);
  auto mv = stats::mean_var(y);
  const double scale = std::exp(shift);
  return {mv.mean * scale, std::sqrt(mv.var / static_cast<double>(y.size())) * scale};
}

struct GaussianTest {
  double ks_stat = 0.0;
  double mean_z = 0.0;
  double var_ratio = 0.0;  // sample variance of z (1 under the prediction)
  std::size_t n = 0;
  bool below_recommended = false;  // checkpoint < 50
  double ks_critical_1pct = 0.0;
};

/// Standardizes log ratios by (mu k, s2 k) and compares them with N(0,1).
inline GaussianTest log_norm_gaussian_test(const EnsembleStats& st, std::int64_t checkpoint,
                                           const lyapunov::LogNormStats& predicted) {
  detail::require(predicted.s2 > 0.0, "log_norm_gaussian_test: predicted s2 must be positive");
  auto x = st.nonzero_samples(checkpoint);
  if (x.size() < 2) throw InsufficientSamples("log_norm_gaussian_test needs nonzero samples");
  const double k = static_cast<double>(checkpoint);
  const double mu = predicted.mu * k, sd = std::sqrt(predicted.s2 * k);
  for (double& v : x) v = (v - mu) / sd;
  auto mv = stats::mean_var(x);
  GaussianTest out;
  out.n = x.size();
  out.mean_z = mv.mean;
  out.var_ratio = mv.var;
  out.below_recommended = checkpoint < 50;
  out.ks_stat = stats::ks_statistic_normal(std::move(x));
  out.ks_critical_1pct = stats::ks_critical_value(out.n, 0.01);
  return out;
}

inline Estimate empirical_zero_fraction(const EnsembleStats& st, std::int64_t checkpoint) {
  const std::size_t i = st.index_of(checkpoint);
  const double n = static_cast<double>(st.trials);
  const double p = static_cast<double>(st.zero_count[i]) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

/// Empirical CDF of the log ratio (zeros at -inf included) on a fixed grid.
struct CdfGrid {
  std::vector<double> x;
  std::vector<double> F;
  std::size_t n = 0;
};

inline CdfGrid empirical_cdf(const EnsembleStats& st, std::int64_t checkpoint, const std::vector<double>& grid) {
  detail::require(!grid.empty() && std::is_sorted(grid.begin(), grid.end()),
                  "empirical_cdf: grid must be nonempty and sorted");
  std::vector<double> xs = st.samples(checkpoint);
  std::sort(xs.begin(), xs.end());
  CdfGrid out{grid, {}, xs.size()};
  out.F.reserve(grid.size());
  for (double g : grid) {
    const auto cnt = std::upper_bound(xs.begin(), xs.end(), g) - xs.begin();
    out.F.push_back(static_cast<double>(cnt) / static_cast<double>(xs.size()));
  }
  return out;
}

/// Evenly spaced grid over the pooled finite range of several sample sets.
inline std::vector<double> pooled_grid(const std::vector<const std::vector<double>*>& samples, std::size_t points) {
  detail::require(points >= 2, "pooled_grid: need at least two points");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* s : samples) {
    for (double v : *s) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  detail::require(lo < hi, "pooled_grid: samples have no finite spread");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return g;
}

struct Dominance {
  double dominant_fraction = 0.0;
  double max_violation = 0.0;  // max(0, max_x F_a(x) - F_b(x))
  double eps = 0.0;
};

/// How often F_a <= F_b + eps on the grid, i.e. a first-order dominates b up to
/// the two-sample DKW band at 1%.
inline Dominance dominance_check(const CdfGrid& a, const CdfGrid& b) {
  if (a.x.size() != b.x.size() || a.F.size() != a.x.size() || b.F.size() != b.x.size() ||
      !std::equal(a.x.begin(), a.x.end(), b.x.begin())) {
    throw GridMismatch("dominance_check: CDFs are not on the same grid");
  }
  detail::require(!a.x.empty(), "dominance_check: empty grid");
  Dominance out;
  out.eps = stats::dkw_two_sample_eps(a.n, b.n, 0.01);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    const double diff = a.F[i] - b.F[i];
    if (diff <= out.eps) ++ok;
    out.max_violation = std::max(out.max_violation, diff);
  }
  out.dominant_fraction = static_cast<double>(ok) / static_cast<double>(a.x.size());
  return out;
}

struct TailOptions {
  double s = 1.0;                // order preserved by cfg.sigma
  std::int64_t base_samples = 10'000;
  int doublings = 4;
  std::int64_t trim = 32;        // largest order statistics dropped from the high-order moment
  double survival_fraction = 0.01;
};

struct TailReport {
  std::vector<std::int64_t> sample_sizes;
  double low_order = 0.0;
  std::vector<double> low_moments;
  double low_spread = 0.0;  // (max - min) / min over prefixes
  bool stable = false;      // low_spread < 0.1
  double high_order = 0.0;
  std::vector<double> high_moments;          // plain sample moments
  std::vector<double> high_trimmed_moments;  // top `trim` values removed
  bool diverging = false;                    // trimmed moments strictly increasing
  double survival_slope = 0.0;               // descriptive: log-log slope of the tail
  std::int64_t required_layers = 0;
};

/// Layers after which the stationary series of the noisy linear chain is
/// truncated below tol: ceil(ln tol / mu), mu the (negative) drift at sigma.
inline std::int64_t heavy_tail_layers(double sigma, std::int64_t d, double tol = 1e-7) {
  const double mu = lyapunov::prelu_log_stats(sigma, d, 1.0).mu;
  if (!(mu < 0.0)) throw DomainError("heavy_tail_layers: sigma does not give a contracting drift");
  return static_cast<std::int64_t>(std::ceil(std::log(tol) / mu));
}

namespace detail {

inline double sample_moment(const std::vector<double>& norms, std::size_t n, double p, std::size_t trim) {
  std::vector<double> v(norms.begin(), norms.begin() + static_cast<std::ptrdiff_t>(n));
  if (trim > 0) {
    std::nth_element(v.begin(), v.end() - static_cast<std::ptrdiff_t>(trim), v.end());
    v.resize(v.size() - trim);
  }
  double s = 0.0;
  for (double x : v) s += std::pow(x, p);
  return s / static_cast<double>(v.size());
}

}  // namespace detail

/// Stationary output of the linear network with additive noise at a
/// moment-preserving sigma. Checks that the order-s/2 moment settles as the
/// sample grows while the order min(2, s+1/2) moment keeps growing.
inline TailReport noisy_linear_tail(const ForwardConfig& cfg, const TailOptions& opt = {}) {
  if (cfg.activation.is_randomized() || cfg.activation.slope() != 1.0 || !(cfg.noise_std > 0.0)) {
    throw ScopeError("noisy_linear_tail needs the linear activation with noise_std > 0");
  }
  detail::require(opt.s > 0.0 && opt.s < 2.0, "noisy_linear_tail: s must lie in (0,2)");
  detail::require(cfg.widths.size() == 1, "noisy_linear_tail: needs a constant width");
  detail::require(opt.base_samples >= 100 && opt.doublings >= 1, "noisy_linear_tail: sample plan too small");
  TailReport rep;
  rep.required_layers = heavy_tail_layers(cfg.sigma, cfg.widths[0]);
  detail::require(cfg.layers >= rep.required_layers,
                  "noisy_linear_tail: layers must be >= " + std::to_string(rep.required_layers));
  const std::int64_t needed = opt.base_samples << opt.doublings;
  detail::require(cfg.trials >= needed, "noisy_linear_tail: trials must be >= " + std::to_string(needed));

  ForwardConfig run = cfg;
  run.checkpoints = {cfg.layers};
  run.x0_kind = InputKind::Basis1;
  const auto st = run_ensemble(run);
  std::vector<double> norms;
  norms.reserve(st.log_ratio[0].size());
  for (double v : st.log_ratio[0]) norms.push_back(std::exp(v));

  rep.low_order = opt.s / 2.0;
  rep.high_order = std::min(2.0, opt.s + 0.5);
  for (int j = 0; j <= opt.doublings; ++j) {
    const std::size_t n = static_cast<std::size_t>(opt.base_samples << j);
    rep.sample_sizes.push_back(static_cast<std::int64_t>(n));
    rep.low_moments.push_back(detail::sample_moment(norms, n, rep.low_order, 0));
    rep.high_moments.push_back(detail::sample_moment(norms, n, rep.high_order, 0));
    rep.high_trimmed_moments.push_back(
        detail::sample_moment(norms, n, rep.high_order, static_cast<std::size_t>(opt.trim)));
  }
  const auto [mn, mx] = std::minmax_element(rep.low_moments.begin(), rep.low_moments.end());
  rep.low_spread = (*mx - *mn) / *mn;
  rep.stable = rep.low_spread < 0.1;
  rep.diverging = true;
  for (std::size_t i = 1; i < rep.high_trimmed_moments.size(); ++i) {
    if (!(rep.high_trimmed_moments[i] > rep.high_trimmed_moments[i - 1])) rep.diverging = false;
  }

  // least-squares slope of log S(x) against log x over the top tail
  std::vector<double> sorted(norms.begin(), norms.begin() + needed);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t m = std::max<std::size_t>(10, static_cast<std::size_t>(opt.survival_fraction * static_cast<double>(sorted.size())));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n_all = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = std::log(sorted[i]);
    const double ly = std::log((static_cast<double>(i) + 0.5) / n_all);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  const double mm = static_cast<double>(m);
  rep.survival_slope = (mm * sxy - sx * sy) / (mm * sxx - sx * sx);
  return rep;
}

}  // namespace fracinit::sim
