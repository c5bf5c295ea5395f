#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ecdf_bands/error.hpp"
#include "ecdf_bands/power.hpp"
#include "ecdf_bands/rng.hpp"

using namespace ecdfb;

TEST(Transform, Examples) {
  for (Family f : {Family::A, Family::B, Family::C}) {
    for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) EXPECT_NEAR(apply_transform(x, {f, 1.0}), x, 1e-15);
  }
  EXPECT_DOUBLE_EQ(apply_transform(0.5, {Family::A, 2.0}), 0.75);
  EXPECT_DOUBLE_EQ(apply_transform(0.25, {Family::C, 2.0}), 0.375);
}

TEST(Transform, StrictlyIncreasingBijectionFixingEnds) {
  for (Family f : {Family::A, Family::B, Family::C}) {
    for (double k : {0.2, 0.8, 1.5, 3.0}) {
      const Transformation t{f, k};
      EXPECT_DOUBLE_EQ(apply_transform(0.0, t), 0.0);
      EXPECT_DOUBLE_EQ(apply_transform(1.0, t), 1.0);
      double prev = 0.0;
      for (int i = 1; i <= 1000; ++i) {
        const double y = apply_transform(i / 1000.0, t);
        EXPECT_GT(y, prev);
        prev = y;
      }
      if (f == Family::B) EXPECT_NEAR(apply_transform(0.5, t), 0.5, 1e-15);
    }
  }
  EXPECT_THROW(apply_transform(1.2, {Family::A, 2.0}), Error);
  EXPECT_THROW(apply_transform(0.2, {Family::A, 0.0}), Error);
}

TEST(Statistics, Examples) {
  const std::vector<double> ends{0.0, 1.0}, half{0.5};
  EXPECT_NEAR(stat_T1(ends), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(stat_W2(half), 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(stat_W2(ends), 0.1667, 5e-5);
  EXPECT_NEAR(stat_U2(ends), stat_W2(ends), 1e-15);
  EXPECT_DOUBLE_EQ(stat_KS(std::vector<double>(7, 1.0)), 1.0);

  const long n = 25;
  std::vector<double> evenly, mids, steps;
  for (long i = 1; i <= n; ++i) {
    evenly.push_back(static_cast<double>(i) / (n + 1.0));
    mids.push_back((2.0 * i - 1.0) / (2.0 * n));
    steps.push_back(static_cast<double>(i) / n);
  }
  EXPECT_NEAR(stat_T1(evenly), 0.0, 1e-15);
  EXPECT_NEAR(stat_W2(mids), 1.0 / (12.0 * n), 1e-15);
  EXPECT_NEAR(stat_KS(steps), 1.0 / n, 1e-15);
  EXPECT_THROW(stat_KS(std::vector<double>{}), Error);
}

TEST(Statistics, WatsonRotationInvariance) {
  std::mt19937_64 gen(4);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> u(40), r(40);
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = uniform01(gen);
      r[i] = std::fmod(u[i] + 0.3, 1.0);
    }
    EXPECT_NEAR(stat_U2(u), stat_U2(r), 1e-9);
  }
}

TEST(Statistics, NonnegativeOnRandomSamples) {
  std::mt19937_64 gen(6);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> u(30);
    for (auto& v : u) v = apply_transform(uniform01(gen), {Family::B, 0.4});
    for (Statistic s : {Statistic::T1, Statistic::W2, Statistic::U2, Statistic::KS}) EXPECT_GE(compute_statistic(s, u), 0.0);
  }
}

TEST(CriticalValue, DeterministicMonotoneAndCalibrated) {
  const double cv = critical_value(Statistic::KS, 100, 0.05, 5000, 1);
  EXPECT_EQ(cv, critical_value(Statistic::KS, 100, 0.05, 5000, 1, Exec::serial));
  EXPECT_GE(critical_value(Statistic::W2, 100, 0.01, 5000, 1), critical_value(Statistic::W2, 100, 0.10, 5000, 1));
  // Asymptotic 5% point of sqrt(n) D is 1.358.
  EXPECT_NEAR(cv * std::sqrt(100.0), 1.358, 0.05);

  long rejected = 0;
  const long reps = 5000;
  for (long rep = 0; rep < reps; ++rep) {
    auto gen = replicate_stream(777, static_cast<std::uint64_t>(rep));
    std::vector<double> u(100);
    for (auto& v : u) v = uniform01(gen);
    rejected += stat_KS(u) > cv ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(rejected) / reps, 0.05, 3.0 * std::sqrt(0.05 * 0.95 / reps) + 3.0 * std::sqrt(0.05 * 0.95 / 5000));
  EXPECT_THROW(critical_value(Statistic::KS, 100, 0.05, 999, 1), Error);
}

TEST(PowerSweep, SizeAtIdentityAndDeterminism) {
  PowerOptions o;
  o.ks = {1.0, 0.5, 2.0};
  o.replicates = 4000;
  o.calibration_replicates = 4000;
  o.seed = 10;
  for (PowerTest test : {PowerTest::bands, PowerTest::T1, PowerTest::W2, PowerTest::U2, PowerTest::KS}) {
    o.test = test;
    const auto c = power_sweep(o);
    ASSERT_EQ(c.rates.size(), 3u);
    // Nominal level plus Monte Carlo slack for both the calibration and the sweep.
    EXPECT_NEAR(c.rates[0], 0.05, 4.0 * std::sqrt(0.05 * 0.95 / 4000) * std::sqrt(2.0)) << to_string(test);
    EXPECT_NEAR(c.std_errors[0], std::sqrt(c.rates[0] * (1 - c.rates[0]) / 4000), 1e-15);
    EXPECT_GT(c.rates[1], c.rates[0]);
    EXPECT_GT(c.rates[2], c.rates[0]);
    EXPECT_EQ(c.rates, power_sweep(o).rates);
  }
}

TEST(PowerSweep, MonotoneDepartureFamilyA) {
  PowerOptions o;
  o.ks = {0.2, 0.5, 0.8, 1.25, 2.0, 3.0};
  o.replicates = 2000;
  o.seed = 3;
  const auto c = power_sweep(o);
  // Common random numbers across k make the curve monotone on each side of k = 1.
  EXPECT_GE(c.rates[0], c.rates[1]);
  EXPECT_GE(c.rates[1], c.rates[2]);
  EXPECT_LE(c.rates[3], c.rates[4]);
  EXPECT_LE(c.rates[4], c.rates[5]);
  EXPECT_GT(c.rates[0] - c.rates[2], 0.05);
}

TEST(PowerSweep, MultiChainVariant) {
  PowerOptions o;
  o.ks = {1.0, 3.0};
  o.chains = 3;
  o.replicates = 2000;
  o.seed = 8;
  const auto c = power_sweep(o);
  EXPECT_NEAR(c.rates[0], 0.05, 0.025);
  EXPECT_GT(c.rates[1], 0.5);
  o.test = PowerTest::KS;
  EXPECT_THROW(power_sweep(o), Error);
}

TEST(PowerSweep, Names) {
  EXPECT_EQ(family_from_string("B"), Family::B);
  EXPECT_EQ(power_test_from_string("U2"), PowerTest::U2);
  EXPECT_STREQ(to_string(PowerTest::bands), "bands");
  EXPECT_THROW(family_from_string("D"), Error);
}
