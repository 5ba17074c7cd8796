#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>

#include "fracinit/errors.hpp"
#include "fracinit/specfn.hpp"

namespace fracinit {

/// phi_a(x) = x for x >= 0, a*x otherwise. a=0 is ReLU, a=1 is linear.
struct ParamReLU {
  double a = 0.0;
};

/// Slope drawn from Uniform[lo, hi] once per layer.
struct RandomizedLeaky {
  double lo = 0.125;
  double hi = 1.0 / 3.0;
};

class Activation {
 public:
  Activation() = default;
  explicit Activation(ParamReLU p) : kind_(p) { validate(); }
  explicit Activation(RandomizedLeaky r) : kind_(r) { validate(); }

  static Activation relu() { return Activation(ParamReLU{0.0}); }
  static Activation leaky(double a = 0.01) { return Activation(ParamReLU{a}); }
  static Activation linear() { return Activation(ParamReLU{1.0}); }
  static Activation prelu(double a) { return Activation(ParamReLU{a}); }
  static Activation randomized(double lo = 0.125, double hi = 1.0 / 3.0) {
    return Activation(RandomizedLeaky{lo, hi});
  }

  /// Accepts relu | linear | leaky | prelu:<a> | rleaky[:<lo>,<hi>].
  static Activation parse(std::string_view text);

  bool is_randomized() const { return std::holds_alternative<RandomizedLeaky>(kind_); }
  bool is_relu() const { return !is_randomized() && slope() == 0.0; }
  bool is_linear() const { return !is_randomized() && slope() == 1.0; }

  double slope() const {
    if (is_randomized()) throw DomainError("activation has a randomized slope");
    return std::get<ParamReLU>(kind_).a;
  }
  const RandomizedLeaky& interval() const {
    if (!is_randomized()) throw DomainError("activation has a fixed slope");
    return std::get<RandomizedLeaky>(kind_);
  }

  /// E[a^p] under the slope distribution (p > 0).
  double slope_moment(double p) const;

  std::string describe() const;

  const std::variant<ParamReLU, RandomizedLeaky>& kind() const { return kind_; }

 private:
  void validate() const;

  std::variant<ParamReLU, RandomizedLeaky> kind_{ParamReLU{0.0}};
};

inline void Activation::validate() const {
  if (const auto* p = std::get_if<ParamReLU>(&kind_)) {
    detail::require(p->a >= 0.0 && p->a <= 1.0, "ParamReLU slope must lie in [0,1]");
  } else {
    const auto& r = std::get<RandomizedLeaky>(kind_);
    detail::require(r.lo >= 0.0 && r.lo < r.hi && r.hi <= 1.0,
                    "RandomizedLeaky needs 0 <= lo < hi <= 1");
  }
}

inline double Activation::slope_moment(double p) const {
  detail::require(p > 0.0, "slope_moment order must be positive");
  if (!is_randomized()) return std::pow(slope(), p);
  const auto& r = interval();
  const double w = r.hi - r.lo;
  if (r.lo == 0.0) return std::pow(r.hi, p) / (p + 1.0);
  // (hi^{p+1} - lo^{p+1}) / ((p+1)(hi-lo)) without cancellation for narrow intervals
  const double log_ratio = std::log1p(w / r.lo);
  return std::pow(r.lo, p + 1.0) * std::expm1((p + 1.0) * log_ratio) / ((p + 1.0) * w);
}

inline std::string Activation::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (is_randomized()) {
    os << "rleaky:" << interval().lo << "," << interval().hi;
  } else if (slope() == 0.0) {
    os << "relu";
  } else if (slope() == 1.0) {
    os << "linear";
  } else {
    os << "prelu:" << slope();
  }
  return os.str();
}

namespace detail {

inline double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw DomainError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

inline Activation Activation::parse(std::string_view text) {
  if (text == "relu") return relu();
  if (text == "linear") return linear();
  if (text == "leaky") return leaky();
  if (text == "rleaky") return randomized();
  if (text.starts_with("prelu:")) {
    return prelu(detail::parse_double(text.substr(6), "prelu slope"));
  }
  if (text.starts_with("rleaky:")) {
    auto body = text.substr(7);
    auto comma = body.find(',');
    if (comma == std::string_view::npos) throw DomainError("rleaky needs <lo>,<hi>");
    return randomized(detail::parse_double(body.substr(0, comma), "rleaky lo"),
                      detail::parse_double(body.substr(comma + 1), "rleaky hi"));
  }
  throw DomainError("unknown activation '" + std::string(text) + "'");
}

/// One kernel evaluation: width d, moment order s, activation, keep probability q.
struct MomentQuery {
  std::int64_t d = 1;
  double s = 2.0;
  Activation activation{};
  double q = 1.0;
  specfn::EvalBudget budget{};

  void validate() const {
    detail::require(d >= 1, "MomentQuery.d must be >= 1");
    detail::require(s > 0.0 && s <= 8.0, "MomentQuery.s must lie in (0, 8]");
    detail::require(q > 0.0 && q <= 1.0, "MomentQuery.q must lie in (0, 1]");
    budget.validate();
  }
};

struct KernelValue {
  double log_I = 0.0;
  double I = 1.0;  // may be +inf when log_I exceeds the double range
  std::int64_t terms_used = 0;
  double tail_bound = 0.0;  // relative to I
};

inline KernelValue make_kernel_value(double log_I, std::int64_t terms, double tail) {
  return KernelValue{log_I, std::exp(log_I), terms, tail};
}

}  // namespace fracinit
