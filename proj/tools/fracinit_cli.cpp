// fracinit: critical initialization variances, kernels, Lyapunov statistics,
// Monte Carlo ensembles and verification suites from the command line.
//
// Exit codes: 0 ok, 1 verification failure, 2 invalid input, 3 budget or
// resource limit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "fracinit/fracinit.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fracinit;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kFailed = 1, kInvalid = 2, kLimit = 3 };

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON has no inf/nan; emit null for them.
json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string sha256_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::vector<char> buf(1 << 16);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char b[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  const std::uint64_t s = rng::generate_seed();
  std::cerr << "seed: " << s << "\n";
  return s;
}

json kernel_json(const KernelValue& kv) {
  return {{"log_I", kv.log_I}, {"I", jnum(kv.I)}, {"terms_used", kv.terms_used}, {"tail_bound", kv.tail_bound}};
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

// ------------------------------------------------------------------ sigma

struct SigmaArgs {
  std::int64_t d = 0;
  double s = 0.0;
  std::string activation = "relu";
  double q = 1.0;
  bool exact = false;
  bool asymptotic = false;
};

int cmd_sigma(const SigmaArgs& a) {
  const Activation act = Activation::parse(a.activation);
  json out;
  out["d"] = a.d;
  out["s"] = a.s;
  out["activation"] = act.describe();
  out["q"] = a.q;
  if (a.asymptotic) {
    if (act.is_randomized()) throw Unsupported("no large-d expansion for a randomized slope");
    const double v = kernels::asymptotic_sigma_sq(a.s, a.d, act.slope(), a.q);
    out["sigma"] = std::sqrt(v);
    out["sigma_sq"] = v;
    out["log_I"] = nullptr;
    out["method"] = "asymptotic";
    out["tail_bound"] = nullptr;
  } else {
    const auto cs = kernels::critical_sigma(MomentQuery{a.d, a.s, act, a.q});
    out["sigma"] = cs.sigma;
    out["sigma_sq"] = cs.sigma_sq;
    out["log_I"] = cs.kernel.log_I;
    out["method"] = "exact";
    out["tail_bound"] = cs.kernel.tail_bound;
  }
  print(out);
  return kOk;
}

// ------------------------------------------------------------------ kernel

int cmd_kernel(std::int64_t d, double s, const std::string& activation, double q, double rel_tol) {
  MomentQuery mq{d, s, Activation::parse(activation), q};
  mq.budget.rel_tol = rel_tol;
  json out{{"d", d}, {"s", s}, {"activation", mq.activation.describe()}, {"q", q}};
  out.update(kernel_json(kernels::kernel(mq)));
  print(out);
  return kOk;
}

// ------------------------------------------------------------------ lyapunov

int cmd_lyapunov(std::int64_t d, const std::string& activation, std::optional<double> sigma,
                 std::optional<double> s, double q) {
  const Activation act = Activation::parse(activation);
  double sig = 0.0;
  if (sigma) {
    sig = *sigma;
  } else {
    sig = kernels::critical_sigma(MomentQuery{d, *s, act, q}).sigma;
  }
  json out{{"d", d}, {"activation", act.describe()}, {"q", q}, {"sigma", sig}};
  const bool fixed = !act.is_randomized();
  if (q == 1.0 && fixed) {
    const auto st = act.slope() == 0.0 ? lyapunov::relu_log_stats(sig, d)
                                       : lyapunov::prelu_log_stats(sig, d, act.slope());
    out["mu"] = st.mu;
    out["s2"] = st.s2;
    out["conditional_on_nonzero"] = st.conditional_on_nonzero;
  } else if (q == 1.0 && act.interval().lo > 0.0) {
    out["mu"] = lyapunov::drift(sig, d, act);
    out["s2"] = nullptr;
    out["conditional_on_nonzero"] = false;
  } else {
    out["mu"] = nullptr;
    out["s2"] = nullptr;
    out["conditional_on_nonzero"] = nullptr;
  }
  const auto lim = as_limit(sig, d, act, q);
  out["limit"] = to_string(lim.kind);
  out["almost_sure"] = lim.almost_sure;
  std::optional<double> order;
  try {
    order = solve_preserved_order(sig, d, act, q);
  } catch (const NoConvergence&) {
    order.reset();
  }
  out["preserved_order"] = order ? json(*order) : json(nullptr);
  out["zero_output_probability_per_layer"] =
      act.is_randomized() || act.slope() > 0.0 ? std::pow(1.0 - q, static_cast<double>(d))
                                               : std::pow(1.0 - 0.5 * q, static_cast<double>(d));
  print(out);
  return kOk;
}

// ------------------------------------------------------------------ simulate

struct SimArgs {
  std::optional<std::int64_t> d;
  std::vector<std::int64_t> widths;
  std::int64_t layers = 0;
  std::string activation = "relu";
  std::optional<double> sigma;
  std::optional<double> s;
  double q = 1.0;
  double noise_std = 0.0;
  std::int64_t trials = 1000;
  std::vector<std::int64_t> checkpoints;
  std::optional<std::uint64_t> seed;
  std::string out = "fracinit_out";
  std::optional<double> moment_order;
  std::string mode = "dense";
  std::size_t grid_points = 200;
  std::optional<double> grid_lo, grid_hi;
  unsigned workers = 0;
  std::string manifest;
  std::optional<double> recorded_s;  // --s of the run a manifest came from
};

json sim_config_json(const SimArgs& a, const sim::ForwardConfig& c, double order) {
  json j;
  j["widths"] = c.widths;
  j["layers"] = c.layers;
  j["activation"] = c.activation.describe();
  j["sigma"] = num(c.sigma);  // string: exact round trip of the resolved double
  const auto s = a.s ? a.s : a.recorded_s;
  j["sigma_from_s"] = s ? json(*s) : json(nullptr);
  j["q"] = c.q;
  j["noise_std"] = c.noise_std;
  j["trials"] = c.trials;
  j["checkpoints"] = c.resolved_checkpoints();
  j["seed"] = c.seed;
  j["mode"] = a.mode;
  j["moment_order"] = order;
  j["grid_points"] = a.grid_points;
  j["grid_lo"] = a.grid_lo ? json(*a.grid_lo) : json(nullptr);
  j["grid_hi"] = a.grid_hi ? json(*a.grid_hi) : json(nullptr);
  return j;
}

/// Fills args from a manifest written by an earlier run.
void load_manifest(SimArgs& a) {
  std::ifstream in(a.manifest);
  if (!in) throw DomainError("cannot open manifest " + a.manifest);
  json m = json::parse(in, nullptr, true);
  if (m.value("command", "") != "simulate") throw DomainError("manifest is not from the simulate command");
  const json& c = m.at("config");
  a.widths = c.at("widths").get<std::vector<std::int64_t>>();
  a.d.reset();
  a.layers = c.at("layers").get<std::int64_t>();
  a.activation = c.at("activation").get<std::string>();
  a.sigma = std::stod(c.at("sigma").get<std::string>());
  a.s.reset();
  if (!c.at("sigma_from_s").is_null()) a.recorded_s = c.at("sigma_from_s").get<double>();
  a.q = c.at("q").get<double>();
  a.noise_std = c.at("noise_std").get<double>();
  a.trials = c.at("trials").get<std::int64_t>();
  a.checkpoints = c.at("checkpoints").get<std::vector<std::int64_t>>();
  a.seed = c.at("seed").get<std::uint64_t>();
  a.mode = c.at("mode").get<std::string>();
  a.moment_order = c.at("moment_order").get<double>();
  a.grid_points = c.at("grid_points").get<std::size_t>();
  if (!c.at("grid_lo").is_null()) a.grid_lo = c.at("grid_lo").get<double>();
  if (!c.at("grid_hi").is_null()) a.grid_hi = c.at("grid_hi").get<double>();
}

/// P(x_k = 0) when every unit of a layer is zero independently with
/// probability p_j = (1 - q/2) for ReLU, (1 - q) otherwise.
double zero_probability(const sim::ForwardConfig& c, std::int64_t k) {
  const bool relu = !c.activation.is_randomized() && c.activation.slope() == 0.0;
  const double p_unit = relu ? 1.0 - 0.5 * c.q : 1.0 - c.q;
  double log_alive = 0.0;
  for (std::int64_t j = 1; j <= k; ++j) {
    log_alive += std::log1p(-std::pow(p_unit, static_cast<double>(c.width_at(j))));
  }
  return -std::expm1(log_alive);
}

int cmd_simulate(SimArgs a) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!a.manifest.empty()) load_manifest(a);

  sim::ForwardConfig c;
  if (!a.widths.empty()) {
    c.widths = a.widths;
    if (a.layers == 0) a.layers = static_cast<std::int64_t>(a.widths.size());
  } else if (a.d) {
    c.widths = {*a.d};
  } else {
    throw DomainError("simulate needs --d or --widths");
  }
  c.layers = a.layers;
  c.activation = Activation::parse(a.activation);
  c.q = a.q;
  c.noise_std = a.noise_std;
  c.trials = a.trials;
  c.checkpoints = a.checkpoints;
  c.seed = resolve_seed(a.seed);
  c.workers = a.workers;
  if (a.mode == "dense") {
    c.mode = sim::Mode::Dense;
  } else if (a.mode == "projected") {
    c.mode = sim::Mode::Projected;
  } else if (a.mode == "normchain") {
    c.mode = sim::Mode::NormChain;
  } else {
    throw DomainError("--mode must be dense, projected or normchain");
  }
  if (a.sigma) {
    c.sigma = *a.sigma;
  } else {
    // the first layer's width fixes sigma; varying widths then follow the product formula
    c.sigma = kernels::critical_sigma(MomentQuery{c.widths.front(), *a.s, c.activation, c.q}).sigma;
  }
  const double order = a.moment_order ? *a.moment_order : (a.s ? *a.s : 2.0);
  if (!(order > 0.0 && order <= 8.0)) throw DomainError("--moment-order must lie in (0, 8]");
  c.validate();

  const auto st = sim::run_ensemble(c);
  const auto cps = c.resolved_checkpoints();

  fs::create_directories(a.out);
  const fs::path dir(a.out);

  {
    std::ofstream f(dir / "lognorm_samples.csv");
    f << "trial,checkpoint,logratio,is_zero\n";
    for (std::size_t i = 0; i < cps.size(); ++i) {
      for (std::size_t t = 0; t < st.log_ratio[i].size(); ++t) {
        const double v = st.log_ratio[i][t];
        f << t << ',' << cps[i] << ',' << num(v) << ',' << (std::isinf(v) ? 1 : 0) << '\n';
      }
    }
  }

  std::vector<double> predicted_moment(cps.size(), std::nan(""));
  if (c.noise_std == 0.0) {
    std::vector<std::int64_t> widths;
    for (std::int64_t k = 1; k <= c.layers; ++k) widths.push_back(c.width_at(k));
    const auto traj = kernels::moment_trajectory(widths, order, c.sigma, c.activation, c.q);
    for (std::size_t i = 0; i < cps.size(); ++i) predicted_moment[i] = traj[static_cast<std::size_t>(cps[i] - 1)];
  }
  std::optional<lyapunov::LogNormStats> per_layer;
  if (c.widths.size() == 1 && c.q == 1.0 && c.noise_std == 0.0 && !c.activation.is_randomized()) {
    per_layer = c.activation.slope() == 0.0 ? lyapunov::relu_log_stats(c.sigma, c.widths[0])
                                            : lyapunov::prelu_log_stats(c.sigma, c.widths[0], c.activation.slope());
  }

  {
    std::ofstream f(dir / "summary.csv");
    f << "checkpoint,trials,moment_order,moment_estimate,moment_se,moment_predicted,zero_fraction,zero_fraction_se,"
         "zero_fraction_predicted,log_mean,log_var,log_mean_predicted,log_var_predicted\n";
    for (std::size_t i = 0; i < cps.size(); ++i) {
      const auto k = cps[i];
      sim::Estimate m{std::nan(""), std::nan("")};
      if (c.trials >= 100) m = sim::estimate_moment(st, order, k);
      const auto z = sim::empirical_zero_fraction(st, k);
      const auto nz = st.nonzero_samples(k);
      const auto mv = stats::mean_var(nz);
      const double zp = c.noise_std == 0.0 ? zero_probability(c, k) : 0.0;
      const double kk = static_cast<double>(k);
      f << k << ',' << c.trials << ',' << num(order) << ',' << num(m.estimate) << ',' << num(m.std_error) << ','
        << num(predicted_moment[i]) << ',' << num(z.estimate) << ',' << num(z.std_error) << ',' << num(zp) << ','
        << num(nz.empty() ? std::nan("") : mv.mean) << ',' << num(nz.size() > 1 ? mv.var : std::nan("")) << ','
        << num(per_layer ? per_layer->mu * kk : std::nan("")) << ','
        << num(per_layer ? per_layer->s2 * kk : std::nan("")) << '\n';
    }
  }

  {
    std::ofstream f(dir / "cdf.csv");
    f << "checkpoint,x,F,n\n";
    for (std::size_t i = 0; i < cps.size(); ++i) {
      std::vector<double> grid;
      if (a.grid_lo && a.grid_hi) {
        if (!(*a.grid_lo < *a.grid_hi) || a.grid_points < 2) throw DomainError("grid needs lo < hi, >= 2 points");
        for (std::size_t g = 0; g < a.grid_points; ++g) {
          grid.push_back(*a.grid_lo + (*a.grid_hi - *a.grid_lo) * static_cast<double>(g) /
                                          static_cast<double>(a.grid_points - 1));
        }
      } else {
        if (st.nonzero_samples(cps[i]).size() < 2) continue;
        grid = sim::pooled_grid({&st.log_ratio[i]}, a.grid_points);
      }
      const auto cdf = sim::empirical_cdf(st, cps[i], grid);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        f << cps[i] << ',' << num(cdf.x[g]) << ',' << num(cdf.F[g]) << ',' << cdf.n << '\n';
      }
    }
  }

  json manifest;
  manifest["command"] = "simulate";
  manifest["tool_version"] = kVersion;
  manifest["seed"] = c.seed;
  manifest["config"] = sim_config_json(a, c, order);
  manifest["started_utc"] = utc_now();
  manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json files = json::array();
  for (const char* name : {"lognorm_samples.csv", "summary.csv", "cdf.csv"}) {
    files.push_back({{"file", name}, {"sha256", sha256_file(dir / name)}, {"bytes", fs::file_size(dir / name)}});
  }
  manifest["outputs"] = files;
  {
    std::ofstream f(dir / "manifest.json");
    f << manifest.dump(2) << '\n';
  }

  print({{"seed", c.seed},
         {"sigma", c.sigma},
         {"moment_order", order},
         {"out", dir.string()},
         {"outputs", files}});
  return kOk;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const std::string& suite, std::int64_t trials, std::optional<std::uint64_t> seed,
               std::int64_t mc_samples, const std::string& out, unsigned workers) {
  verify::Suite which;
  if (suite == "kernels") which = verify::Suite::Kernels;
  else if (suite == "lyapunov") which = verify::Suite::Lyapunov;
  else if (suite == "simulate") which = verify::Suite::Simulate;
  else if (suite == "all") which = verify::Suite::All;
  else throw DomainError("--suite must be kernels, lyapunov, simulate or all");

  verify::Options opt;
  opt.seed = resolve_seed(seed);
  opt.trials = trials;
  opt.mc_samples = mc_samples;
  opt.workers = workers;
  if (trials < 100) throw DomainError("--trials must be >= 100");
  if (mc_samples < 100) throw DomainError("--mc-samples must be >= 100");

  const auto results = verify::run_suite(which, opt);
  std::ostringstream csv;
  csv << "criterion,name,predicted,observed,tolerance,pass\n";
  bool all = true;
  json report = json::array();
  for (const auto& r : results) {
    for (const auto& row : r.rows) {
      std::string name = row.name;
      for (char& ch : name) if (ch == ',') ch = ';';
      csv << r.id << ',' << name << ',' << num(row.predicted) << ',' << num(row.observed) << ','
          << num(row.tolerance) << ',' << (row.pass ? 1 : 0) << '\n';
    }
    all = all && r.pass();
    std::cerr << (r.pass() ? "PASS " : "FAIL ") << r.id << " " << r.title << " (" << r.rows.size() << " checks, "
              << r.failures() << " failed)" << (r.note.empty() ? "" : " error: " + r.note) << "\n";
    report.push_back({{"criterion", r.id},
                      {"title", r.title},
                      {"pass", r.pass()},
                      {"checks", r.rows.size()},
                      {"failed", r.failures()},
                      {"seconds", r.seconds},
                      {"error", r.note.empty() ? json(nullptr) : json(r.note)}});
  }
  json summary{{"suite", suite}, {"seed", opt.seed}, {"pass", all}, {"criteria", report}};
  if (!out.empty()) {
    fs::create_directories(out);
    std::ofstream(fs::path(out) / "verify.csv") << csv.str();
    summary["csv"] = (fs::path(out) / "verify.csv").string();
  }
  print(summary);
  return all ? kOk : kFailed;
}

// ------------------------------------------------------------------ dominance

struct Cdf {
  std::vector<double> x, F;
  std::size_t n = 0;
};

Cdf read_cdf(const std::string& path, std::int64_t checkpoint) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != "checkpoint,x,F,n") throw DomainError(path + " is not a cdf.csv file");
  Cdf out;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cp, x, F, n;
    std::getline(ss, cp, ',');
    std::getline(ss, x, ',');
    std::getline(ss, F, ',');
    std::getline(ss, n, ',');
    if (std::stoll(cp) != checkpoint) continue;
    out.x.push_back(std::stod(x));
    out.F.push_back(std::stod(F));
    out.n = static_cast<std::size_t>(std::stoull(n));
  }
  if (out.x.empty()) throw DomainError(path + " has no rows for checkpoint " + std::to_string(checkpoint));
  return out;
}

std::vector<double> read_samples(const std::string& path, std::int64_t checkpoint) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != "trial,checkpoint,logratio,is_zero") throw DomainError(path + " is not a lognorm_samples.csv file");
  std::vector<double> out;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string t, cp, v;
    std::getline(ss, t, ',');
    std::getline(ss, cp, ',');
    std::getline(ss, v, ',');
    if (std::stoll(cp) != checkpoint) continue;
    out.push_back(v == "-inf" ? -std::numeric_limits<double>::infinity() : std::stod(v));
  }
  if (out.empty()) throw DomainError(path + " has no rows for checkpoint " + std::to_string(checkpoint));
  return out;
}

sim::CdfGrid cdf_on(std::vector<double> xs, const std::vector<double>& grid) {
  std::sort(xs.begin(), xs.end());
  sim::CdfGrid g{grid, {}, xs.size()};
  for (double x : grid) {
    g.F.push_back(static_cast<double>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) /
                  static_cast<double>(xs.size()));
  }
  return g;
}

int cmd_dominance(const std::string& cdf_a, const std::string& cdf_b, const std::string& samples_a,
                  const std::string& samples_b, std::int64_t checkpoint, std::size_t points, double threshold) {
  sim::CdfGrid a, b;
  if (!cdf_a.empty()) {
    const auto ra = read_cdf(cdf_a, checkpoint), rb = read_cdf(cdf_b, checkpoint);
    a = {ra.x, ra.F, ra.n};
    b = {rb.x, rb.F, rb.n};
  } else {
    const auto xa = read_samples(samples_a, checkpoint), xb = read_samples(samples_b, checkpoint);
    const auto grid = sim::pooled_grid({&xa, &xb}, points);
    a = cdf_on(xa, grid);
    b = cdf_on(xb, grid);
  }
  const auto dom = sim::dominance_check(a, b);
  const bool pass = dom.dominant_fraction >= threshold;
  print({{"checkpoint", checkpoint},
         {"grid_points", a.x.size()},
         {"dominant_fraction", dom.dominant_fraction},
         {"max_violation", dom.max_violation},
         {"dkw_eps", dom.eps},
         {"threshold", threshold},
         {"a_dominates_b", pass}});
  return pass ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional-moment-preserving initialization for deep fully connected networks"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // sigma
  SigmaArgs sa;
  auto* sigma = app.add_subcommand("sigma", "critical sigma preserving the s-th moment");
  sigma->add_option("--d", sa.d, "layer width")->required()->check(CLI::PositiveNumber);
  sigma->add_option("--s", sa.s, "moment order in (0, 8]")->required();
  sigma->add_option("--activation", sa.activation, "relu | linear | leaky | prelu:<a> | rleaky:<lo>,<hi>");
  sigma->add_option("--q", sa.q, "dropout keep probability");
  auto* ex = sigma->add_flag("--exact", sa.exact, "exact kernel (default)");
  sigma->add_flag("--asymptotic", sa.asymptotic, "large-d expansion")->excludes(ex);

  // kernel
  std::int64_t k_d = 0;
  double k_s = 0.0, k_q = 1.0, k_tol = 1e-12;
  std::string k_act = "relu";
  auto* kern = app.add_subcommand("kernel", "moment kernel I(s,d)");
  kern->add_option("--d", k_d, "layer width")->required()->check(CLI::PositiveNumber);
  kern->add_option("--s", k_s, "moment order in (0, 8]")->required();
  kern->add_option("--activation", k_act, "activation");
  kern->add_option("--q", k_q, "dropout keep probability");
  kern->add_option("--rel-tol", k_tol, "series truncation tolerance");

  // lyapunov
  std::int64_t l_d = 0;
  std::string l_act = "relu";
  std::optional<double> l_sigma, l_s;
  double l_q = 1.0;
  auto* lyap = app.add_subcommand("lyapunov", "drift, spread and limit of log||x_k||");
  lyap->add_option("--d", l_d, "layer width")->required()->check(CLI::PositiveNumber);
  lyap->add_option("--activation", l_act, "activation");
  auto* l_sig_opt = lyap->add_option("--sigma", l_sigma, "weight standard deviation");
  auto* l_s_opt = lyap->add_option("--s", l_s, "use the critical sigma of this order");
  l_sig_opt->excludes(l_s_opt);
  lyap->add_option("--q", l_q, "dropout keep probability");

  // simulate
  SimArgs ma;
  auto* simc = app.add_subcommand("simulate", "Monte Carlo forward propagation");
  auto* d_opt = simc->add_option("--d", ma.d, "constant layer width");
  auto* w_opt = simc->add_option("--widths", ma.widths, "per-layer widths")->delimiter(',');
  d_opt->excludes(w_opt);
  simc->add_option("--layers", ma.layers, "depth (default: number of --widths)");
  simc->add_option("--activation", ma.activation, "activation");
  auto* sig_opt = simc->add_option("--sigma", ma.sigma, "weight standard deviation");
  auto* s_opt = simc->add_option("--s", ma.s, "use the critical sigma of this order");
  sig_opt->excludes(s_opt);
  simc->add_option("--q", ma.q, "dropout keep probability");
  simc->add_option("--noise-std", ma.noise_std, "additive noise (linear activation only)");
  simc->add_option("--trials", ma.trials, "ensemble size");
  simc->add_option("--checkpoints", ma.checkpoints, "layers to record (default: all)")->delimiter(',');
  simc->add_option("--seed", ma.seed, "master seed (generated and printed if absent)");
  simc->add_option("--out", ma.out, "output directory");
  simc->add_option("--moment-order", ma.moment_order, "order of the summarized moment (default: --s or 2)");
  simc->add_option("--mode", ma.mode, "dense | projected | normchain");
  simc->add_option("--grid-points", ma.grid_points, "CDF grid size");
  simc->add_option("--grid-lo", ma.grid_lo, "fixed CDF grid lower end");
  simc->add_option("--grid-hi", ma.grid_hi, "fixed CDF grid upper end");
  simc->add_option("--workers", ma.workers, "threads (0: all cores)");
  auto* man_opt = simc->add_option("--manifest", ma.manifest, "re-run the configuration recorded in a manifest");
  for (auto* o : {d_opt, w_opt, sig_opt, s_opt}) man_opt->excludes(o);

  // verify
  std::string v_suite = "all", v_out;
  std::int64_t v_trials = 10'000, v_mc = 1'000'000;
  std::optional<std::uint64_t> v_seed;
  unsigned v_workers = 0;
  auto* ver = app.add_subcommand("verify", "run a verification suite");
  ver->add_option("--suite", v_suite, "kernels | lyapunov | simulate | all");
  ver->add_option("--trials", v_trials, "ensemble size for the simulation checks");
  ver->add_option("--mc-samples", v_mc, "samples for the direct kernel estimates");
  ver->add_option("--seed", v_seed, "master seed (generated and printed if absent)");
  ver->add_option("--out", v_out, "directory for verify.csv");
  ver->add_option("--workers", v_workers, "threads (0: all cores)");

  // dominance
  std::string ca, cb, sa_path, sb_path;
  std::int64_t dom_cp = 0;
  std::size_t dom_points = 200;
  double dom_threshold = 0.99;
  auto* dom = app.add_subcommand("dominance", "does ensemble A first-order dominate B?");
  auto* ca_opt = dom->add_option("--cdf-a", ca, "cdf.csv of A");
  auto* cb_opt = dom->add_option("--cdf-b", cb, "cdf.csv of B (same grid as A)");
  auto* sa_opt = dom->add_option("--samples-a", sa_path, "lognorm_samples.csv of A");
  auto* sb_opt = dom->add_option("--samples-b", sb_path, "lognorm_samples.csv of B");
  ca_opt->needs(cb_opt);
  cb_opt->needs(ca_opt);
  sa_opt->needs(sb_opt);
  sb_opt->needs(sa_opt);
  ca_opt->excludes(sa_opt);
  cb_opt->excludes(sb_opt);
  dom->add_option("--checkpoint", dom_cp, "layer to compare")->required();
  dom->add_option("--grid-points", dom_points, "pooled grid size for --samples-*");
  dom->add_option("--threshold", dom_threshold, "required dominant fraction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*sigma) return cmd_sigma(sa);
    if (*kern) return cmd_kernel(k_d, k_s, k_act, k_q, k_tol);
    if (*lyap) {
      if (!l_sigma && !l_s) throw DomainError("lyapunov needs exactly one of --sigma or --s");
      return cmd_lyapunov(l_d, l_act, l_sigma, l_s, l_q);
    }
    if (*simc) {
      if (ma.manifest.empty() && !ma.sigma && !ma.s) throw DomainError("simulate needs exactly one of --sigma or --s");
      if (ma.manifest.empty() && ma.layers == 0 && ma.widths.empty()) throw DomainError("simulate needs --layers");
      return cmd_simulate(ma);
    }
    if (*ver) return cmd_verify(v_suite, v_trials, v_seed, v_mc, v_out, v_workers);
    if (*dom) {
      if (ca.empty() && sa_path.empty()) throw DomainError("dominance needs --cdf-a/--cdf-b or --samples-a/--samples-b");
      return cmd_dominance(ca, cb, sa_path, sb_path, dom_cp, dom_points, dom_threshold);
    }
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kLimit;
  } catch (const ResourceLimit& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kLimit;
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kLimit;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
