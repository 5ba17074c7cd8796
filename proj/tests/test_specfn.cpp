#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "fracinit/specfn.hpp"
#include "oracle_support.hpp"
#include "oracles/frozen_values.hpp"

using namespace fracinit;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Specfn, MatchesFrozenGammaFamily) {
  for (const auto& v : frozen::kSpecfn) {
    SCOPED_TRACE(v.x);
    EXPECT_LE(std::abs(specfn::log_gamma(v.x) - v.lgamma), 1e-14 * std::max(1.0, std::abs(v.lgamma)));
    EXPECT_LE(std::abs(specfn::digamma(v.x) - v.digamma), 1e-14 * std::max(1.0, std::abs(v.digamma)));
    EXPECT_LE(rel(specfn::trigamma(v.x), v.trigamma), 1e-14);
  }
}

TEST(Specfn, GammaRatioMatchesFrozen) {
  for (const auto& v : frozen::kGammaRatio) {
    SCOPED_TRACE(v.x);
    EXPECT_LE(rel(specfn::log_gamma_ratio(v.x, v.h), v.log_ratio), 1e-13);
  }
}

TEST(Specfn, LogGammaExactAtOneAndTwo) {
  EXPECT_EQ(specfn::log_gamma(1.0), 0.0);
  EXPECT_EQ(specfn::log_gamma(2.0), 0.0);
}

TEST(Specfn, RecurrencesHoldOnRandomArguments) {
  oracle::Gen gen(11);
  for (int i = 0; i < 500; ++i) {
    const double x = gen.log_uniform(1e-3, 1e5);
    EXPECT_NEAR(specfn::log_gamma(x + 1.0), specfn::log_gamma(x) + std::log(x),
                2e-15 * std::max(1.0, std::abs(specfn::log_gamma(x + 1.0))) + 1e-15 * std::abs(std::log(x)));
    EXPECT_NEAR(specfn::digamma(x + 1.0), specfn::digamma(x) + 1.0 / x,
                4e-15 * std::max(1.0, std::abs(specfn::digamma(x)) + 1.0 / x));
    EXPECT_LE(rel(specfn::trigamma(x), specfn::trigamma(x + 1.0) + 1.0 / (x * x)), 1e-14);
  }
}

TEST(Specfn, GammaRatioAgreesWithDifferenceOfLogs) {
  oracle::Gen gen(12);
  for (int i = 0; i < 500; ++i) {
    const double x = gen.log_uniform(0.1, 50.0);
    const double h = gen.uniform(-0.09, 4.0);
    const double direct = specfn::log_gamma(x + h) - specfn::log_gamma(x);
    EXPECT_NEAR(specfn::log_gamma_ratio(x, h), direct, 1e-13 * std::max(1.0, std::abs(specfn::log_gamma(x))));
  }
}

TEST(Specfn, LogBetaSymmetricAndConsistent) {
  oracle::Gen gen(13);
  for (int i = 0; i < 200; ++i) {
    const double x = gen.log_uniform(0.01, 100.0), y = gen.log_uniform(0.01, 100.0);
    EXPECT_DOUBLE_EQ(specfn::log_beta(x, y), specfn::log_beta(y, x));
    // B(x, y) = B(x+1, y) (x+y)/x
    EXPECT_NEAR(specfn::log_beta(x, y), specfn::log_beta(x + 1.0, y) + std::log((x + y) / x),
                1e-12 * std::max(1.0, std::abs(specfn::log_beta(x, y))));
  }
}

TEST(Specfn, GeneralizedBinomial) {
  EXPECT_DOUBLE_EQ(specfn::gen_binomial(5.0, 2), 10.0);
  EXPECT_DOUBLE_EQ(specfn::gen_binomial(0.5, 0), 1.0);
  EXPECT_DOUBLE_EQ(specfn::gen_binomial(-0.5, 2), 0.375);
  EXPECT_EQ(specfn::gen_binomial(3.0, 4), 0.0);
  for (std::uint64_t k = 1; k < 20; ++k) EXPECT_EQ(specfn::gen_binomial(static_cast<double>(k) - 1.0, k), 0.0);
  // (r choose k) = Gamma(r+1) / (Gamma(k+1) Gamma(r-k+1)) away from poles
  oracle::Gen gen(14);
  for (int i = 0; i < 200; ++i) {
    const double r = gen.uniform(20.0, 60.0);
    const auto k = static_cast<std::uint64_t>(gen.integer(0, 15));
    const double kk = static_cast<double>(k);
    const double expect = std::exp(std::lgamma(r + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(r - kk + 1.0));
    EXPECT_LE(rel(specfn::gen_binomial(r, k), expect), 1e-12);
  }
}

TEST(Specfn, BinomialPmfNormalizesAcrossRegimes) {
  for (std::int64_t d : {1, 2, 7, 64, 1000, 5000}) {
    for (double p : {0.5, 0.4, 1e-3, 0.999}) {
      std::vector<double> logs;
      for (std::int64_t n = 0; n <= d; ++n) logs.push_back(specfn::log_binomial_pmf(d, n, p));
      EXPECT_NEAR(specfn::log_sum_exp(logs), 0.0, 1e-12) << "d=" << d << " p=" << p;
    }
  }
  // deep tail stays finite instead of underflowing to -inf
  EXPECT_NEAR(specfn::log_binomial_pmf(4096, 0, 0.5), -4096.0 * std::log(2.0), 1e-9);
}

TEST(Specfn, LogBinomialCoefficient) {
  EXPECT_EQ(specfn::log_binomial_coefficient(10, 0), 0.0);
  EXPECT_EQ(specfn::log_binomial_coefficient(10, 10), 0.0);
  EXPECT_NEAR(specfn::log_binomial_coefficient(10, 3), std::log(120.0), 1e-14);
  EXPECT_THROW(specfn::log_binomial_coefficient(3, 4), DomainError);
}

TEST(Specfn, LogSumExpHandlesExtremes) {
  specfn::LogSumExp acc;
  EXPECT_TRUE(acc.empty());
  EXPECT_EQ(acc.value(), -std::numeric_limits<double>::infinity());
  acc.add(-std::numeric_limits<double>::infinity());
  EXPECT_TRUE(acc.empty());
  acc.add(1000.0);
  acc.add(1000.0);
  EXPECT_NEAR(acc.value(), 1000.0 + std::log(2.0), 1e-12);
  acc.add(-1000.0);
  EXPECT_NEAR(acc.value(), 1000.0 + std::log(2.0), 1e-12);

  oracle::Gen gen(15);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> logs;
    double direct = 0.0;
    for (int j = 0; j < 20; ++j) {
      logs.push_back(gen.uniform(-30.0, 30.0));
      direct += std::exp(logs.back());
    }
    EXPECT_NEAR(specfn::log_sum_exp(logs), std::log(direct), 1e-13);
  }
}

TEST(Specfn, RejectsOutOfDomain) {
  EXPECT_THROW(specfn::log_gamma(0.0), DomainError);
  EXPECT_THROW(specfn::digamma(-1.0), DomainError);
  EXPECT_THROW(specfn::trigamma(std::numeric_limits<double>::quiet_NaN()), DomainError);
  EXPECT_THROW(specfn::log_binomial_pmf(4, 1, 0.0), DomainError);
  EXPECT_THROW((specfn::EvalBudget{0.1, 10}.validate()), DomainError);
  EXPECT_THROW((specfn::EvalBudget{1e-12, 0}.validate()), DomainError);
}
