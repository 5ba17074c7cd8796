#include <cmath>

#include <gtest/gtest.h>

#include "fracinit/kernels.hpp"
#include "fracinit/lyapunov.hpp"
#include "fracinit/regime.hpp"
#include "oracle_support.hpp"

using namespace fracinit;

namespace {

double sigma_bar(std::int64_t d, double s, const Activation& act, double q = 1.0) {
  return kernels::critical_sigma(MomentQuery{d, s, act, q}).sigma;
}

}  // namespace

TEST(PreservedOrder, RoundTripThroughCriticalSigma) {
  oracle::Gen gen(41);
  for (int i = 0; i < 40; ++i) {
    const double a = gen.pick<double>({0.0, 1.0, gen.uniform(0.01, 1.0)});
    const double s = gen.uniform(0.2, 6.0);
    const auto d = gen.integer(1, 64);
    const double q = gen.pick<double>({1.0, gen.uniform(0.5, 1.0)});
    const auto act = Activation::prelu(a);
    const auto root = solve_preserved_order(sigma_bar(d, s, act, q), d, act, q);
    ASSERT_TRUE(root.has_value()) << "a=" << a << " s=" << s << " d=" << d << " q=" << q;
    EXPECT_NEAR(*root, s, 1e-8 * s) << "a=" << a << " d=" << d << " q=" << q;
  }
}

TEST(PreservedOrder, KaimingAndLecunPreserveTheSecondMoment) {
  for (std::int64_t d : {1, 8, 256}) {
    const double dd = static_cast<double>(d);
    EXPECT_NEAR(*solve_preserved_order(std::sqrt(2.0 / dd), d, Activation::relu()), 2.0, 1e-10);
    EXPECT_NEAR(*solve_preserved_order(std::sqrt(1.0 / dd), d, Activation::linear()), 2.0, 1e-10);
  }
}

TEST(PreservedOrder, ExistsExactlyWhenDriftIsNegative) {
  oracle::Gen gen(42);
  for (int i = 0; i < 60; ++i) {
    const double a = gen.uniform(0.01, 1.0);
    const auto d = gen.integer(1, 32);
    const auto act = Activation::prelu(a);
    const double sig_c = std::exp(-lyapunov::prelu_log_stats(1.0, d, a).mu);
    const double sig = sig_c * gen.log_uniform(0.5, 2.0);
    const double mu = lyapunov::drift(sig, d, act);
    if (std::abs(mu) < 1e-3) continue;  // the root is then too close to 0 to resolve
    try {
      const auto root = solve_preserved_order(sig, d, act);
      EXPECT_EQ(root.has_value(), mu < 0.0) << "a=" << a << " d=" << d << " mu=" << mu;
    } catch (const NoConvergence&) {
      EXPECT_LT(mu, 0.0) << "a=" << a << " d=" << d;  // root lies beyond s = 8
    }
  }
}

TEST(PreservedOrder, TinySigmaHasNoRootBelowEight) {
  EXPECT_THROW(solve_preserved_order(1e-6, 8, Activation::relu()), NoConvergence);
}

TEST(PreservedOrder, RejectsBadArguments) {
  EXPECT_THROW(solve_preserved_order(0.0, 8, Activation::relu()), DomainError);
  EXPECT_THROW(solve_preserved_order(1.0, 0, Activation::relu()), DomainError);
  EXPECT_THROW(solve_preserved_order(1.0, 8, Activation::relu(), 1.5), DomainError);
}

TEST(ClassifyRegime, ThreeWays) {
  const auto act = Activation::relu();
  const double sb = sigma_bar(64, 1.0, act);
  const MomentQuery q{64, 1.0, act};
  const auto at = classify_regime(sb, q);
  EXPECT_EQ(at.regime, Regime::Preserving);
  EXPECT_NEAR(at.ratio, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(*at.preserved_order, 1.0);
  // ReLU reports the drift conditional on a nonzero output
  ASSERT_TRUE(at.mu.has_value());
  EXPECT_DOUBLE_EQ(*at.mu, lyapunov::relu_log_stats(sb, 64).mu);

  const auto lo = classify_regime(0.95 * sb, q);
  EXPECT_EQ(lo.regime, Regime::Contracting);
  EXPECT_NEAR(lo.ratio, 0.95, 1e-12);
  EXPECT_GT(*lo.preserved_order, 1.0);

  const auto hi = classify_regime(1.05 * sb, q);
  EXPECT_EQ(hi.regime, Regime::Exploding);
  EXPECT_LT(*hi.preserved_order, 1.0);

  const auto lin = classify_regime(sigma_bar(16, 1.0, Activation::linear()), MomentQuery{16, 1.0, Activation::linear()});
  ASSERT_TRUE(lin.mu.has_value());
  EXPECT_LT(*lin.mu, 0.0);

  EXPECT_THROW(classify_regime(sb, MomentQuery{64, 3.0, act}), DomainError);
  EXPECT_EQ(std::string(to_string(Regime::Exploding)), "exploding");
}

TEST(AsLimit, Verdicts) {
  const std::int64_t d = 32;
  const double dd = static_cast<double>(d);
  // ReLU and dropout: absorbed at zero
  EXPECT_EQ(as_limit(std::sqrt(2.0 / dd), d, Activation::relu()).kind, LimitKind::ZeroAlmostSure);
  EXPECT_EQ(as_limit(1.0, d, Activation::linear(), 0.9).kind, LimitKind::ZeroAlmostSure);

  // Lecun: second moment preserved, so the norm still tends to zero
  const auto lecun = as_limit(std::sqrt(1.0 / dd), d, Activation::linear());
  EXPECT_EQ(lecun.kind, LimitKind::ZeroLimit);
  EXPECT_NEAR(*lecun.preserved_order, 2.0, 1e-10);
  EXPECT_TRUE(lecun.almost_sure);
  EXPECT_LT(*lecun.mu, 0.0);

  const auto big = as_limit(std::sqrt(4.0 / dd), d, Activation::linear());
  EXPECT_EQ(big.kind, LimitKind::InfinityLimit);
  EXPECT_FALSE(big.preserved_order.has_value());

  const double sig_c = std::exp(-lyapunov::prelu_log_stats(1.0, d, 0.3).mu);
  EXPECT_EQ(as_limit(sig_c, d, Activation::prelu(0.3)).kind, LimitKind::Critical);

  // root below 1: L_p convergence only
  const auto weak = as_limit(sig_c * 0.999, d, Activation::prelu(0.3));
  EXPECT_EQ(weak.kind, LimitKind::ZeroLimit);
  EXPECT_LT(*weak.preserved_order, 1.0);
  EXPECT_FALSE(weak.almost_sure);

  EXPECT_EQ(std::string(to_string(LimitKind::InfinityLimit)), "infinity_limit");
}

TEST(AsLimit, RandomizedSlopeUsesMeanDrift) {
  const auto act = Activation::randomized(0.125, 1.0 / 3.0);
  const double sig = sigma_bar(16, 2.0, act);
  const auto v = as_limit(sig, 16, act);
  EXPECT_EQ(v.kind, LimitKind::ZeroLimit);
  EXPECT_NEAR(*v.preserved_order, 2.0, 1e-8);
}
