#pragma once

// Verification suites: each check compares a prediction with an independent
// evaluation (closed form, Monte Carlo, or a structural property) and records
// one row.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "fracinit/kernels.hpp"
#include "fracinit/lyapunov.hpp"
#include "fracinit/regime.hpp"
#include "fracinit/rng.hpp"
#include "fracinit/simulate.hpp"

namespace fracinit::verify {

struct CheckRow {
  std::string name;
  double predicted = 0.0;
  double observed = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<CheckRow> rows;
  double seconds = 0.0;
  std::string note;  // error text when the criterion could not run

  bool pass() const {
    if (!note.empty() || rows.empty()) return false;
    for (const auto& r : rows) {
      if (!r.pass) return false;
    }
    return true;
  }
  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.pass ? 0 : 1;
    return n;
  }
};

struct Options {
  std::uint64_t seed = 7;
  std::int64_t trials = 10'000;       // ensembles for moment / CLT / dominance checks
  std::int64_t mc_samples = 1'000'000;  // direct kernel estimates
  unsigned workers = 0;
};

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

inline CheckRow within(std::string name, double predicted, double observed, double tol) {
  return {std::move(name), predicted, observed, tol, std::abs(observed - predicted) <= tol};
}

inline CheckRow rel_within(std::string name, double predicted, double observed, double rel) {
  const double tol = rel * std::abs(predicted);
  return {std::move(name), predicted, observed, tol, std::abs(observed - predicted) <= tol};
}

/// Runs body, timing it and turning a thrown error into a failed criterion.
inline CriterionResult run(int id, std::string title, const std::function<void(std::vector<CheckRow>&)>& body) {
  CriterionResult res;
  res.id = id;
  res.title = std::move(title);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(res.rows);
  } catch (const std::exception& e) {
    res.note = e.what();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

inline double sigma_bar(std::int64_t d, double s, const Activation& act, double q = 1.0) {
  return kernels::critical_sigma(MomentQuery{d, s, act, q}).sigma;
}

inline double sigma_bar_sq(std::int64_t d, double s, const Activation& act, double q = 1.0) {
  return kernels::critical_sigma(MomentQuery{d, s, act, q}).sigma_sq;
}

/// Direct Monte Carlo of E||phi_a(z) * eps / q||^s for several slopes and
/// orders from one set of draws: with P, N the masked squared norms of the
/// positive and negative parts, ||.||^2 = (P + a^2 N) / q^2.
struct McCell {
  double mean = 0.0;
  double se = 0.0;
};

inline std::vector<std::vector<McCell>> mc_kernel_grid(std::int64_t d, double q, const std::vector<double>& slopes,
                                                       const std::vector<double>& orders, std::int64_t samples,
                                                       std::uint64_t seed) {
  auto eng = rng::make_stream(seed, static_cast<std::uint64_t>(d) * 1000 + static_cast<std::uint64_t>(q * 100),
                              rng::StreamKind::Weights);
  boost::random::normal_distribution<double> normal;
  std::bernoulli_distribution keep(q);
  const std::size_t na = slopes.size(), ns = orders.size();
  std::vector<double> sum(na * ns, 0.0), sum2(na * ns, 0.0);
  const double inv_q2 = 1.0 / (q * q);
  for (std::int64_t i = 0; i < samples; ++i) {
    double p = 0.0, n = 0.0;
    for (std::int64_t j = 0; j < d; ++j) {
      const double z = normal(eng);
      if (q < 1.0 && !keep(eng)) continue;
      (z > 0.0 ? p : n) += z * z;
    }
    for (std::size_t ia = 0; ia < na; ++ia) {
      const double r2 = (p + slopes[ia] * slopes[ia] * n) * inv_q2;
      if (r2 == 0.0) continue;
      const double lr = std::log(r2);
      for (std::size_t is = 0; is < ns; ++is) {
        const double v = std::exp(0.5 * orders[is] * lr);
        sum[ia * ns + is] += v;
        sum2[ia * ns + is] += v * v;
      }
    }
  }
  std::vector<std::vector<McCell>> out(na, std::vector<McCell>(ns));
  const double m = static_cast<double>(samples);
  for (std::size_t ia = 0; ia < na; ++ia) {
    for (std::size_t is = 0; is < ns; ++is) {
      const double mean = sum[ia * ns + is] / m;
      const double var = (sum2[ia * ns + is] / m - mean * mean) * m / (m - 1.0);
      out[ia][is] = {mean, std::sqrt(std::max(var, 0.0) / m)};
    }
  }
  return out;
}

}  // namespace detail

/// Ensembles shared between the simulation checks (keyed by a label).
class EnsembleCache {
 public:
  explicit EnsembleCache(Options opt) : opt_(opt) {}

  const sim::EnsembleStats& get(const std::string& key, const std::function<sim::ForwardConfig()>& make) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    sim::ForwardConfig cfg = make();
    cfg.workers = opt_.workers;
    return cache_.emplace(key, sim::run_ensemble(cfg)).first->second;
  }

  const Options& options() const { return opt_; }

  /// d=64, k=100 ensemble at sigma, checkpoints {10, 50, 100}.
  const sim::EnsembleStats& deep64(const std::string& key, const Activation& act, double sigma,
                                   std::uint64_t seed_offset) {
    return get(key, [&] {
      sim::ForwardConfig c;
      c.widths = {64};
      c.layers = 100;
      c.activation = act;
      c.sigma = sigma;
      c.trials = opt_.trials;
      c.seed = opt_.seed + seed_offset;
      c.checkpoints = {10, 50, 100};
      return c;
    });
  }

 private:
  Options opt_;
  std::map<std::string, sim::EnsembleStats> cache_;
};

// ---------------------------------------------------------------- kernels

inline CriterionResult kaiming_lecun_recovery() {
  return detail::run(1, "Kaiming/Lecun recovery at s=2, d=1..4096", [](auto& rows) {
    double worst_relu = 0.0, worst_lin = 0.0;
    std::int64_t arg_relu = 1, arg_lin = 1;
    for (std::int64_t d = 1; d <= 4096; ++d) {
      const double dd = static_cast<double>(d);
      const double r = std::abs(detail::sigma_bar_sq(d, 2.0, Activation::relu()) * dd / 2.0 - 1.0);
      const double l = std::abs(detail::sigma_bar_sq(d, 2.0, Activation::linear()) * dd - 1.0);
      if (r > worst_relu) worst_relu = r, arg_relu = d;
      if (l > worst_lin) worst_lin = l, arg_lin = d;
    }
    rows.push_back({"relu max rel err sigma^2 vs 2/d (worst d=" + std::to_string(arg_relu) + ")", 0.0, worst_relu,
                    1e-12, worst_relu <= 1e-12});
    rows.push_back({"linear max rel err sigma^2 vs 1/d (worst d=" + std::to_string(arg_lin) + ")", 0.0, worst_lin,
                    1e-12, worst_lin <= 1e-12});
  });
}

inline CriterionResult closed_form_s2() {
  return detail::run(2, "series at s=2-1e-9 vs (1+a^2)d/2", [](auto& rows) {
    for (double a : {0.01, 0.2, 0.5, 0.9}) {
      for (std::int64_t d : {2, 8, 64}) {
        const double exact = 0.5 * (1.0 + a * a) * static_cast<double>(d);
        const double series = kernels::kernel(MomentQuery{d, 2.0 - 1e-9, Activation::prelu(a)}).I;
        rows.push_back(detail::rel_within("a=" + detail::fmt(a) + " d=" + std::to_string(d), exact, series, 1e-6));
      }
    }
  });
}

inline CriterionResult kernel_vs_monte_carlo(const Options& opt) {
  return detail::run(3, "kernel vs direct Monte Carlo, 72 cells, 4 SE", [&](auto& rows) {
    const std::vector<double> slopes{0.0, 0.01, 0.5, 1.0};
    const std::vector<double> orders{0.5, 1.0, 1.5};
    for (std::int64_t d : {4, 16, 64}) {
      for (double q : {1.0, 0.8}) {
        auto mc = detail::mc_kernel_grid(d, q, slopes, orders, opt.mc_samples, opt.seed);
        for (std::size_t ia = 0; ia < slopes.size(); ++ia) {
          for (std::size_t is = 0; is < orders.size(); ++is) {
            const double I = kernels::kernel(MomentQuery{d, orders[is], Activation::prelu(slopes[ia]), q}).I;
            rows.push_back(detail::within("a=" + detail::fmt(slopes[ia]) + " s=" + detail::fmt(orders[is]) +
                                              " d=" + std::to_string(d) + " q=" + detail::fmt(q),
                                          I, mc[ia][is].mean, 4.0 * mc[ia][is].se));
          }
        }
      }
    }
  });
}

inline CriterionResult asymptotic_agreement() {
  return detail::run(4, "d^2 |exact - asymptotic| decreasing over d=256,512,1024", [](auto& rows) {
    struct Family {
      std::string name;
      double a;
      double q;
    };
    const std::vector<Family> fams{{"relu", 0.0, 1.0}, {"linear", 1.0, 1.0}, {"relu+dropout q=0.8", 0.0, 0.8},
                                   {"linear+dropout q=0.8", 1.0, 0.8}, {"relu+dropout q=0.5", 0.0, 0.5},
                                   {"linear+dropout q=0.5", 1.0, 0.5}};
    for (const auto& f : fams) {
      for (double s : {0.5, 1.0, 1.5}) {
        std::vector<double> scaled;
        for (std::int64_t d : {256, 512, 1024}) {
          const double exact = detail::sigma_bar_sq(d, s, Activation::prelu(f.a), f.q);
          const double approx = kernels::asymptotic_sigma_sq(s, d, f.a, f.q);
          const double dd = static_cast<double>(d);
          scaled.push_back(dd * dd * std::abs(exact - approx));
        }
        const bool dec = scaled[1] < scaled[0] && scaled[2] < scaled[1];
        rows.push_back({f.name + " s=" + detail::fmt(s) + " d^2|diff| at 256 -> 1024", scaled[0], scaled[2], 0.0, dec});
      }
    }
  });
}

inline CriterionResult monotonicity() {
  return detail::run(10, "sigma_bar strictly decreasing in a, s, d", [](auto& rows) {
    const std::vector<double> as{0.0, 0.01, 0.2, 1.0};
    const std::vector<double> ss{0.5, 1.0, 1.5, 2.0};
    std::vector<std::int64_t> ds;
    for (std::int64_t d = 2; d <= 128; d += 2) ds.push_back(d);
    // table[a][s][d]
    std::vector<std::vector<std::vector<double>>> t(as.size(), std::vector<std::vector<double>>(ss.size()));
    for (std::size_t ia = 0; ia < as.size(); ++ia) {
      for (std::size_t is = 0; is < ss.size(); ++is) {
        for (auto d : ds) t[ia][is].push_back(detail::sigma_bar(d, ss[is], Activation::prelu(as[ia])));
      }
    }
    std::size_t bad_d = 0, bad_s = 0, bad_a = 0, n_d = 0, n_s = 0, n_a = 0;
    for (std::size_t ia = 0; ia < as.size(); ++ia) {
      for (std::size_t is = 0; is < ss.size(); ++is) {
        for (std::size_t id = 0; id < ds.size(); ++id) {
          if (id + 1 < ds.size()) {
            ++n_d;
            bad_d += t[ia][is][id + 1] < t[ia][is][id] ? 0 : 1;
          }
          if (is + 1 < ss.size()) {
            ++n_s;
            bad_s += t[ia][is + 1][id] < t[ia][is][id] ? 0 : 1;
          }
          if (ia + 1 < as.size()) {
            ++n_a;
            bad_a += t[ia + 1][is][id] < t[ia][is][id] ? 0 : 1;
          }
        }
      }
    }
    rows.push_back({"violations in d (of " + std::to_string(n_d) + ")", 0.0, static_cast<double>(bad_d), 0.0, bad_d == 0});
    rows.push_back({"violations in s (of " + std::to_string(n_s) + ")", 0.0, static_cast<double>(bad_s), 0.0, bad_s == 0});
    rows.push_back({"violations in a (of " + std::to_string(n_a) + ")", 0.0, static_cast<double>(bad_a), 0.0, bad_a == 0});
  });
}

// ---------------------------------------------------------------- lyapunov

inline CriterionResult lyapunov_identities() {
  return detail::run(11, "weight normalization, negative drift at sigma_bar, sign flip", [](auto& rows) {
    for (double a : {0.01, 0.2, 0.9}) {
      double worst = 0.0;
      for (std::int64_t d = 1; d <= 64; ++d) {
        for (std::int64_t n = 1; n <= d; ++n) {
          worst = std::max(worst, std::abs(lyapunov::weight_normalization(n, d, a) - 1.0));
        }
      }
      rows.push_back({"max |sum_k w B - 1|, a=" + detail::fmt(a) + ", n<=d<=64", 0.0, worst, 1e-9, worst <= 1e-9});
    }
    for (double a : {0.01, 0.2, 0.9, 1.0}) {
      for (double s : {0.5, 1.0, 1.5, 2.0}) {
        for (std::int64_t d : {2, 8, 64}) {
          const double sig = detail::sigma_bar(d, s, Activation::prelu(a));
          const double mu = lyapunov::prelu_log_stats(sig, d, a).mu;
          rows.push_back({"mu(sigma_bar) a=" + detail::fmt(a) + " s=" + detail::fmt(s) + " d=" + std::to_string(d),
                          0.0, mu, 0.0, mu < 0.0});
        }
      }
    }
    // mu is ln(sigma) plus a constant, so its root is explicit.
    for (double a : {0.01, 0.2, 0.9, 1.0}) {
      for (std::int64_t d : {2, 8, 64}) {
        const Activation act = Activation::prelu(a);
        const double sig_c = std::exp(-lyapunov::prelu_log_stats(1.0, d, a).mu);
        const double below = sig_c * (1.0 - 1e-3), above = sig_c * (1.0 + 1e-3);
        const double mu_lo = lyapunov::prelu_log_stats(below, d, a).mu;
        const double mu_hi = lyapunov::prelu_log_stats(above, d, a).mu;
        const auto root_lo = solve_preserved_order(below, d, act);
        const auto root_hi = solve_preserved_order(above, d, act);
        const bool ok = mu_lo < 0.0 && mu_hi > 0.0 && root_lo.has_value() && !root_hi.has_value();
        rows.push_back({"sign flip at sigma_c(1 -/+ 1e-3), a=" + detail::fmt(a) + " d=" + std::to_string(d),
                        mu_lo, mu_hi, 0.0, ok});
      }
    }
  });
}

// ---------------------------------------------------------------- simulate

inline CriterionResult moment_preservation(EnsembleCache& cache) {
  return detail::run(5, "first moment preserved at sigma_bar(1,64), k=10,50,100", [&](auto& rows) {
    const std::vector<std::pair<std::string, Activation>> acts{
        {"relu", Activation::relu()}, {"linear", Activation::linear()}, {"leaky", Activation::leaky()}};
    std::uint64_t off = 0;
    for (const auto& [name, act] : acts) {
      const auto& st = cache.deep64(name + "@s1", act, detail::sigma_bar(64, 1.0, act), off++);
      for (std::int64_t k : {10, 50, 100}) {
        const auto e = sim::estimate_moment(st, 1.0, k);
        rows.push_back(detail::within(name + " k=" + std::to_string(k), 1.0, e.estimate, 3.0 * e.std_error));
      }
    }
  });
}

inline CriterionResult regime_separation(const Options& opt) {
  return detail::run(6, "0.95 sigma_bar -> ratio < 0.1, 1.05 sigma_bar -> ratio > 10 at k=100", [&](auto& rows) {
    const Activation relu = Activation::relu();
    const double sb = detail::sigma_bar(64, 1.0, relu);
    std::uint64_t off = 100;
    for (double f : {0.95, 1.05}) {
      sim::ForwardConfig c;
      c.widths = {64};
      c.layers = 100;
      c.activation = relu;
      c.sigma = f * sb;
      c.trials = std::max<std::int64_t>(2000, opt.trials / 5);
      c.seed = opt.seed + off++;
      c.checkpoints = {100};
      c.workers = opt.workers;
      const auto st = sim::run_ensemble(c);
      const auto e = sim::estimate_moment(st, 1.0, 100);
      const double predicted = std::pow(f, 100.0);
      const bool ok = f < 1.0 ? e.estimate < 0.1 : e.estimate > 10.0;
      rows.push_back({"sigma=" + detail::fmt(f) + " sigma_bar, empirical ratio (pred " + detail::fmt(predicted) + ")",
                      f < 1.0 ? 0.1 : 10.0, e.estimate, 0.0, ok});
    }
  });
}

inline CriterionResult log_normality(EnsembleCache& cache) {
  return detail::run(7, "KS of standardized log-norms at k=100 vs N(0,1), 1%", [&](auto& rows) {
    const std::vector<std::pair<std::string, double>> acts{{"relu", 0.0}, {"leaky", 0.01}, {"linear", 1.0}};
    for (const auto& [name, a] : acts) {
      const Activation act = Activation::prelu(a);
      const double sig = detail::sigma_bar(64, 1.0, act);
      const std::uint64_t off = a == 0.0 ? 0 : (a == 1.0 ? 1 : 2);
      const auto& st = cache.deep64(name + "@s1", act, sig, off);
      const auto pred = a == 0.0 ? lyapunov::relu_log_stats(sig, 64) : lyapunov::prelu_log_stats(sig, 64, a);
      const auto g = sim::log_norm_gaussian_test(st, 100, pred);
      rows.push_back({name + " KS statistic", g.ks_critical_1pct, g.ks_stat, g.ks_critical_1pct,
                      g.ks_stat <= g.ks_critical_1pct});
    }
  });
}

inline CriterionResult zero_output_law(const Options& opt) {
  return detail::run(8, "ReLU zero-output fraction, d=4, k=1,5,10, 1e5 trials", [&](auto& rows) {
    const double sb = detail::sigma_bar(4, 2.0, Activation::relu());
    std::vector<sim::EnsembleStats> runs;
    std::uint64_t off = 200;
    for (double f : {1.0, 2.0}) {
      sim::ForwardConfig c;
      c.widths = {4};
      c.layers = 10;
      c.activation = Activation::relu();
      c.sigma = f * sb;
      c.trials = 100'000;
      c.seed = opt.seed + off++;
      c.checkpoints = {1, 5, 10};
      c.workers = opt.workers;
      runs.push_back(sim::run_ensemble(c));
    }
    for (std::int64_t k : {1, 5, 10}) {
      const double p = lyapunov::zero_output_probability(4, k);
      const auto a = sim::empirical_zero_fraction(runs[0], k);
      const auto b = sim::empirical_zero_fraction(runs[1], k);
      rows.push_back(detail::within("k=" + std::to_string(k) + " sigma", p, a.estimate, 3.0 * a.std_error));
      rows.push_back(detail::within("k=" + std::to_string(k) + " 2 sigma", p, b.estimate, 3.0 * b.std_error));
      rows.push_back(detail::within("k=" + std::to_string(k) + " sigma vs 2 sigma", a.estimate, b.estimate,
                                    3.0 * std::hypot(a.std_error, b.std_error)));
    }
  });
}

inline CriterionResult stochastic_dominance(EnsembleCache& cache) {
  return detail::run(9, "log-norm CDF at s=1 init dominates Kaiming, d=64, k=100", [&](auto& rows) {
    const Activation relu = Activation::relu();
    const auto& ours = cache.deep64("relu@s1", relu, detail::sigma_bar(64, 1.0, relu), 0);
    const auto& kaiming = cache.deep64("relu@s2", relu, detail::sigma_bar(64, 2.0, relu), 3);
    const auto grid = sim::pooled_grid({&ours.samples(100), &kaiming.samples(100)}, 200);
    const auto fa = sim::empirical_cdf(ours, 100, grid);
    const auto fb = sim::empirical_cdf(kaiming, 100, grid);
    const auto dom = sim::dominance_check(fa, fb);
    rows.push_back({"dominant grid fraction (max violation " + detail::fmt(dom.max_violation) + ", eps " +
                        detail::fmt(dom.eps) + ")",
                    0.99, dom.dominant_fraction, 0.0, dom.dominant_fraction >= 0.99});
  });
}

inline CriterionResult heavy_tail(const Options& opt) {
  return detail::run(12, "noisy linear chain: order-0.5 moment stable, order-1.5 growing", [&](auto& rows) {
    const std::int64_t d = 16;
    const double s = 1.0;
    const double sig = detail::sigma_bar(d, s, Activation::linear());
    sim::TailOptions to;
    to.s = s;
    sim::ForwardConfig c;
    c.widths = {d};
    c.activation = Activation::linear();
    c.sigma = sig;
    c.noise_std = 1.0;
    c.layers = sim::heavy_tail_layers(sig, d);
    c.trials = to.base_samples << to.doublings;
    c.seed = opt.seed + 300;
    c.mode = sim::Mode::NormChain;
    c.workers = opt.workers;
    const auto rep = sim::noisy_linear_tail(c, to);
    rows.push_back({"order-0.5 spread across 1e4..1.6e5 samples", 0.1, rep.low_spread, 0.1, rep.stable});
    std::ostringstream seq;
    for (double m : rep.high_trimmed_moments) seq << detail::fmt(m) << " ";
    rows.push_back({"order-1.5 trimmed moments increasing: " + seq.str(), rep.high_trimmed_moments.front(),
                    rep.high_trimmed_moments.back(), 0.0, rep.diverging});
  });
}

enum class Suite { Kernels, Lyapunov, Simulate, All };

inline std::vector<CriterionResult> run_suite(Suite suite, const Options& opt) {
  std::vector<CriterionResult> out;
  const bool all = suite == Suite::All;
  if (all || suite == Suite::Kernels) {
    out.push_back(kaiming_lecun_recovery());
    out.push_back(closed_form_s2());
    out.push_back(kernel_vs_monte_carlo(opt));
    out.push_back(asymptotic_agreement());
    out.push_back(monotonicity());
  }
  if (all || suite == Suite::Lyapunov) out.push_back(lyapunov_identities());
  if (all || suite == Suite::Simulate) {
    EnsembleCache cache(opt);
    out.push_back(moment_preservation(cache));
    out.push_back(regime_separation(opt));
    out.push_back(log_normality(cache));
    out.push_back(zero_output_law(opt));
    out.push_back(stochastic_dominance(cache));
    out.push_back(heavy_tail(opt));
  }
  return out;
}

}  // namespace fracinit::verify
