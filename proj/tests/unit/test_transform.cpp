#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ecdf_bands/error.hpp"
#include "ecdf_bands/rng.hpp"
#include "ecdf_bands/transform.hpp"

using namespace ecdfb;

namespace {

std::vector<double> as_vector(const EvaluationGrid& g) { return {g.points().begin(), g.points().end()}; }

}  // namespace

TEST(EmpiricalPit, Examples) {
  const std::vector<double> y0{0.0};
  auto pit = empirical_pit(y0, {{-1.0, 1.0}});
  EXPECT_EQ(pit.values, std::vector<double>{0.5});
  EXPECT_EQ(pit.resolution, 2);

  const std::vector<double> y1{5.0};
  EXPECT_EQ(empirical_pit(y1, {{1.0, 2.0, 3.0}}).values, std::vector<double>{1.0});

  const std::vector<double> y2{0.3};
  EXPECT_EQ(empirical_pit(y2, {{0.1, 0.2, 0.4, 0.9}}).values, std::vector<double>{0.5});
}

TEST(EmpiricalPit, InvariantUnderJointMonotoneMap) {
  std::mt19937_64 gen(11);
  std::vector<double> y(40);
  std::vector<std::vector<double>> x(40, std::vector<double>(25));
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = standard_normal(gen);
    for (auto& v : x[i]) v = standard_normal(gen);
  }
  auto f = [](double v) { return std::exp(2.0 * v) + v * v * v; };
  std::vector<double> fy(y.size());
  std::transform(y.begin(), y.end(), fy.begin(), f);
  auto fx = x;
  for (auto& row : fx) std::transform(row.begin(), row.end(), row.begin(), f);
  EXPECT_EQ(empirical_pit(y, x).values, empirical_pit(fy, fx).values);
}

TEST(EmpiricalPit, Errors) {
  const std::vector<double> y{0.0, 1.0};
  EXPECT_THROW(empirical_pit(y, {{1.0}}), Error);
  try {
    empirical_pit(y, {{1.0}, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_comparison);
  }
}

TEST(FractionalRanks, Examples) {
  const std::vector<double> a{3, 1, 2}, b{1, 1, 2}, c{5};
  const auto ra = fractional_ranks(a);
  EXPECT_DOUBLE_EQ(ra[0], 1.0);
  EXPECT_DOUBLE_EQ(ra[1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(ra[2], 2.0 / 3.0);
  const auto rb = fractional_ranks(b);
  EXPECT_DOUBLE_EQ(rb[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rb[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rb[2], 1.0);
  EXPECT_EQ(fractional_ranks(c), std::vector<double>{1.0});
}

TEST(FractionalRanks, TieFreeSampleIsPermutationOfGrid) {
  std::mt19937_64 gen(3);
  std::vector<double> y(57);
  for (auto& v : y) v = uniform01(gen);
  auto r = fractional_ranks(y);
  std::sort(r.begin(), r.end());
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_DOUBLE_EQ(r[i], static_cast<double>(i + 1) / 57.0);
}

TEST(JointRanks, Examples) {
  const auto r = joint_fractional_ranks(ChainSet({{1, 3}, {2, 4}}));
  EXPECT_EQ(r, (std::vector<std::vector<double>>{{0.25, 0.75}, {0.5, 1.0}}));
  EXPECT_EQ(joint_fractional_ranks(ChainSet({{7}, {9}})), (std::vector<std::vector<double>>{{0.5}, {1.0}}));

  auto tied = joint_fractional_ranks(ChainSet({{1, 1}, {1, 1}}));
  std::vector<double> pooled;
  for (const auto& c : tied) pooled.insert(pooled.end(), c.begin(), c.end());
  std::sort(pooled.begin(), pooled.end());
  EXPECT_EQ(pooled, (std::vector<double>{0.25, 0.5, 0.75, 1.0}));
}

TEST(JointRanks, PooledRanksArePermutation) {
  for (TiePolicy policy : {TiePolicy::deterministic, TiePolicy::random}) {
    // Coarse values force many ties.
    std::mt19937_64 gen(5);
    std::vector<std::vector<double>> c(3, std::vector<double>(20));
    for (auto& chain : c) {
      for (auto& v : chain) v = std::floor(uniform01(gen) * 4.0);
    }
    const auto ranks = joint_ranks(ChainSet(c), {policy, 17});
    std::vector<long> pooled;
    for (const auto& r : ranks) pooled.insert(pooled.end(), r.begin(), r.end());
    std::sort(pooled.begin(), pooled.end());
    for (std::size_t i = 0; i < pooled.size(); ++i) EXPECT_EQ(pooled[i], static_cast<long>(i + 1));
    EXPECT_EQ(ranks, joint_ranks(ChainSet(c), {policy, 17}));
  }
}

TEST(JointRanks, RandomTiesDependOnSeed) {
  const ChainSet c({std::vector<double>(30, 0.0), std::vector<double>(30, 0.0)});
  EXPECT_NE(joint_ranks(c, {TiePolicy::random, 1}), joint_ranks(c, {TiePolicy::random, 2}));
}

TEST(ChainSet, RejectsUnequalAndNonFinite) {
  try {
    ChainSet({{1.0, 2.0}, {1.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unequal_chain_lengths);
  }
  EXPECT_THROW(ChainSet({{1.0, NAN}}), Error);
}

TEST(EcdfEval, Examples) {
  const std::vector<double> a{0.2, 0.8};
  EXPECT_EQ(ecdf_eval(a, EvaluationGrid({0.5, 1.0})).counts, (std::vector<long>{1, 2}));
  const std::vector<double> b{0.25, 0.5, 0.5, 1.0};
  EXPECT_EQ(ecdf_eval(b, EvaluationGrid::uniform(4)).counts, (std::vector<long>{1, 3, 3, 4}));
}

TEST(EcdfEval, MonotoneAndPrependIncrementsAll) {
  std::mt19937_64 gen(9);
  std::vector<double> u(80);
  for (auto& v : u) v = uniform01(gen);
  const auto grid = EvaluationGrid::uniform(13);
  const auto t = ecdf_eval(u, grid);
  EXPECT_TRUE(std::is_sorted(t.counts.begin(), t.counts.end()));
  EXPECT_EQ(t.counts.back(), 80);
  u.push_back(grid[0] / 2.0);
  const auto t2 = ecdf_eval(u, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(t2.counts[i], t.counts[i] + 1);
}

TEST(EcdfEval, RejectsOutOfRange) {
  const std::vector<double> u{0.5, 1.5};
  EXPECT_THROW(ecdf_eval(u, EvaluationGrid::uniform(2)), Error);
}

TEST(DefaultGrid, Examples) {
  EXPECT_EQ(as_vector(default_grid(250)), as_vector(EvaluationGrid::uniform(100)));
  EXPECT_EQ(default_grid(250, 50).size(), 50u);
  EXPECT_EQ(as_vector(default_grid(3)), (std::vector<double>{1.0 / 3.0, 2.0 / 3.0, 1.0}));
  // Largest divisor of S not above min(N, k_max).
  EXPECT_EQ(default_grid(1000, 150).size(), 75u);
  EXPECT_EQ(default_grid(7, 12).size(), 6u);
}

TEST(EvaluationGrid, Validation) {
  EXPECT_THROW(EvaluationGrid(std::vector<double>{}), Error);
  EXPECT_THROW(EvaluationGrid({0.5, 0.5}), Error);
  EXPECT_THROW(EvaluationGrid({0.0, 0.5}), Error);
  EXPECT_THROW(EvaluationGrid({0.5, 1.1}), Error);
  EXPECT_THROW(EvaluationGrid::uniform(0), Error);
}

TEST(PooledSizes, FloorWithRoundingGuard) {
  EXPECT_EQ(pooled_sizes(EvaluationGrid::uniform(3), 4, 2), (std::vector<long>{2, 5, 8}));
  EXPECT_EQ(pooled_sizes(EvaluationGrid::uniform(3), 3, 1), (std::vector<long>{1, 2, 3}));
  EXPECT_EQ(pooled_sizes(EvaluationGrid::uniform(10), 7, 3).back(), 21);
}

TEST(FractionalRankGrid, DistinctSortedRanks) {
  const std::vector<double> y{0.3, 0.1, 0.1, 0.9};
  EXPECT_EQ(as_vector(fractional_rank_grid(y)), (std::vector<double>{0.5, 0.75, 1.0}));
}
