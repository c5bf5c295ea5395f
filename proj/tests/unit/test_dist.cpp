#include <cmath>
#include <numeric>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include "ecdf_bands/dist.hpp"

using namespace ecdfb;
using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

namespace {

cpp_int choose_exact(long n, long k) {
  if (k < 0 || k > n) return 0;
  cpp_int r = 1;
  for (long j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

cpp_rational pow_exact(const cpp_rational& x, long e) {
  cpp_rational r = 1;
  for (long i = 0; i < e; ++i) r *= x;
  return r;
}

// Exact rational Pr(X <= k), X ~ Bin(n, num/den).
double binom_cdf_exact(long k, long n, long num, long den) {
  const cpp_rational p(num, den), q = 1 - p;
  cpp_rational total = 0;
  for (long j = 0; j <= std::min(k, n); ++j) total += cpp_rational(choose_exact(n, j)) * pow_exact(p, j) * pow_exact(q, n - j);
  return static_cast<double>(total);
}

double hyper_pmf_exact(long k, long succ, long fail, long draws) {
  return static_cast<double>(cpp_rational(choose_exact(succ, k) * choose_exact(fail, draws - k), choose_exact(succ + fail, draws)));
}

}  // namespace

TEST(Binomial, MatchesExactRationalSum) {
  for (long den_num : {1L, 5L, 9L}) {
    const double p = static_cast<double>(den_num) / 10.0;
    for (long n = 0; n <= 60; ++n) {
      for (long k = 0; k <= n; ++k) {
        EXPECT_NEAR(binom_cdf(k, n, p), binom_cdf_exact(k, n, den_num, 10), 1e-12) << "n=" << n << " k=" << k << " p=" << p;
      }
    }
  }
}

TEST(Binomial, Examples) {
  EXPECT_DOUBLE_EQ(binom_cdf(7, 7, 0.3), 1.0);
  EXPECT_NEAR(binom_cdf(0, 2, 0.5), 0.25, 1e-15);
  EXPECT_NEAR(binom_cdf(1, 3, 0.5), 0.5, 1e-15);
  EXPECT_EQ(binom_cdf(-1, 3, 0.5), 0.0);
  EXPECT_EQ(binom_quantile(1.0, 5, 0.2), 5);
  EXPECT_EQ(binom_quantile(0.0, 5, 0.2), 0);
  EXPECT_EQ(binom_quantile(0.5, 4, 0.5), 2);
}

TEST(Binomial, QuantileIsLowerAdjointOfCdf) {
  for (long n : {1L, 7L, 40L, 333L}) {
    for (double p : {0.01, 0.3, 0.5, 0.97}) {
      for (long k = 0; k <= n; ++k) {
        // A CDF that rounds to 1 is the q = 1 query, whose answer is the top of the support.
        const double c = binom_cdf(k, n, p);
        EXPECT_LE(binom_quantile(c, n, p), c < 1.0 ? k : n);
      }
    }
  }
}

TEST(Binomial, FarTailKeepsRelativeAccuracy) {
  // Pr(X <= 0) = 0.5^200, far below double epsilon relative to 1.
  EXPECT_NEAR(binom_cdf(0, 200, 0.5) / std::pow(0.5, 200), 1.0, 1e-12);
}

TEST(Binomial, DegenerateProbabilities) {
  EXPECT_EQ(binom_cdf(0, 10, 0.0), 1.0);
  EXPECT_EQ(binom_cdf(9, 10, 1.0), 0.0);
  EXPECT_EQ(binom_quantile(0.5, 10, 1.0), 10);
  EXPECT_EQ(binom_quantile(0.5, 10, 0.0), 0);
}

TEST(Binomial, LargeN) {
  const long n = 1000000;
  EXPECT_NEAR(binom_cdf(n / 2, n, 0.5), 0.5 + 0.5 * binom_pmf(n / 2, n, 0.5), 1e-12);
  EXPECT_NEAR(binom_pmf(n / 2, n, 0.5), 1.0 / std::sqrt(M_PI * n / 2.0) * (1.0 - 1.0 / (4.0 * n)), 1e-12);
}

TEST(Hypergeometric, Examples) {
  EXPECT_DOUBLE_EQ(hyper_cdf(3, 5, 4, 3), 1.0);
  EXPECT_NEAR(hyper_cdf(0, 2, 2, 2), 1.0 / 6.0, 1e-15);
  EXPECT_EQ(hyper_cdf(-1, 5, 5, 3), 0.0);
  EXPECT_EQ(hyper_quantile(1.0, 3, 3, 4), 3);
  EXPECT_EQ(hyper_quantile(0.0, 3, 3, 4), 1);
  EXPECT_EQ(hyper_quantile(0.5, 2, 2, 2), 1);
}

TEST(Hypergeometric, MatchesExactRationalPmf) {
  for (long succ = 0; succ <= 30; succ += 3) {
    for (long fail = 0; fail <= 30; fail += 5) {
      for (long draws = 0; draws <= succ + fail; draws += 4) {
        double cdf = 0.0;
        for (long k = hyper_support_min(succ, fail, draws); k <= hyper_support_max(succ, fail, draws); ++k) {
          const double exact = hyper_pmf_exact(k, succ, fail, draws);
          EXPECT_NEAR(hyper_pmf(k, succ, fail, draws), exact, 1e-13);
          cdf += exact;
          EXPECT_NEAR(hyper_cdf(k, succ, fail, draws), std::min(cdf, 1.0), 1e-12);
        }
      }
    }
  }
}

TEST(Hypergeometric, CdfMonotoneAndReachesOne) {
  for (long draws : {0L, 1L, 17L, 50L, 99L, 100L}) {
    double prev = 0.0;
    const long hi = hyper_support_max(60, 40, draws);
    for (long k = hyper_support_min(60, 40, draws); k <= hi; ++k) {
      const double c = hyper_cdf(k, 60, 40, draws);
      EXPECT_GE(c, prev);
      prev = c;
    }
    EXPECT_DOUBLE_EQ(hyper_cdf(hi, 60, 40, draws), 1.0);
  }
}

TEST(MultiHypergeometric, Examples) {
  const std::vector<long> counts{1, 1};
  EXPECT_NEAR(mhyper_pmf(counts, {{2, 2}, 2}), 2.0 / 3.0, 1e-15);
  const std::vector<long> corner{3, 0, 0};
  EXPECT_NEAR(mhyper_pmf(corner, {{3, 4, 2}, 3}), 1.0 / 84.0, 1e-15);
}

TEST(MultiHypergeometric, SumsToOne) {
  for (const std::vector<long>& pops : std::vector<std::vector<long>>{{4, 4, 4}, {1, 5, 6}, {3, 3, 3, 3}, {0, 7, 5}}) {
    const long total = std::accumulate(pops.begin(), pops.end(), 0L);
    for (long draws = 0; draws <= total; ++draws) {
      MHypParams params{pops, draws};
      double sum = 0.0;
      std::vector<long> c(pops.size(), 0);
      // Odometer over all count vectors bounded by the populations.
      while (true) {
        if (std::accumulate(c.begin(), c.end(), 0L) == draws) sum += mhyper_pmf(c, params);
        std::size_t d = 0;
        while (d < c.size() && ++c[d] > pops[d]) c[d++] = 0;
        if (d == c.size()) break;
      }
      EXPECT_NEAR(sum, 1.0, 1e-10);
    }
  }
}

TEST(MultiHypergeometric, TwoCategoriesMatchHypergeometricIncrements) {
  for (long draws = 0; draws <= 18; ++draws) {
    for (long k = hyper_support_min(11, 7, draws); k <= hyper_support_max(11, 7, draws); ++k) {
      const std::vector<long> c{k, draws - k};
      const double inc = hyper_cdf(k, 11, 7, draws) - hyper_cdf(k - 1, 11, 7, draws);
      EXPECT_NEAR(mhyper_pmf(c, {{11, 7}, draws}), inc, 1e-12);
    }
  }
}

TEST(LogWeight, ProbabilityInUnitInterval) {
  for (long k = -1; k <= 11; ++k) {
    const double p = binom_log_pmf(k, 10, 0.37).prob();
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  EXPECT_EQ(binom_log_pmf(11, 10, 0.37).prob(), 0.0);
}
