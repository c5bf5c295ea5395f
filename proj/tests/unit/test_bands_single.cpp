#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include <gtest/gtest.h>
#include <omp.h>

#include "ecdf_bands/bands_single.hpp"
#include "ecdf_bands/error.hpp"
#include "ecdf_bands/reference.hpp"

using namespace ecdfb;

namespace {

double choose(long n, long k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (long j = 1; j <= k; ++j) r = r * static_cast<double>(n - k + j) / static_cast<double>(j);
  return r;
}

double pmf(long k, long n, double p) {
  return choose(n, k) * std::pow(p, static_cast<double>(k)) * std::pow(1.0 - p, static_cast<double>(n - k));
}

long quantile(double q, long n, double p) {
  if (q <= 0.0) return 0;
  double c = 0.0;
  for (long k = 0; k <= n; ++k) {
    c += pmf(k, n, p);
    if (c >= q) return k;
  }
  return n;
}

// Exact coverage by enumerating all S^N samples from the discrete uniform on {1/S, ..., 1}.
double enumerated_coverage(long n, long s, const EvaluationGrid& grid, double gamma) {
  std::vector<long> lo(grid.size()), hi(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    lo[i] = quantile(gamma / 2.0, n, grid[i]);
    hi[i] = quantile(1.0 - gamma / 2.0, n, grid[i]);
  }
  long total = 1;
  for (long j = 0; j < n; ++j) total *= s;
  long inside = 0;
  for (long code = 0; code < total; ++code) {
    std::vector<long> draws;
    for (long j = 0, c = code; j < n; ++j, c /= s) draws.push_back(c % s + 1);
    bool ok = true;
    for (std::size_t i = 0; i < grid.size() && ok; ++i) {
      const long r = std::count_if(draws.begin(), draws.end(),
                                   [&](long d) { return static_cast<double>(d) / static_cast<double>(s) <= grid[i] + 1e-12; });
      ok = r >= lo[i] && r <= hi[i];
    }
    inside += ok ? 1 : 0;
  }
  return static_cast<double>(inside) / static_cast<double>(total);
}

}  // namespace

TEST(Coverage, Examples) {
  const EvaluationGrid half({0.5});
  EXPECT_DOUBLE_EQ(coverage_probability(4, half, 0.0), 1.0);
  EXPECT_NEAR(coverage_probability(4, half, 0.5), 14.0 / 16.0, 1e-15);
  EXPECT_DOUBLE_EQ(coverage_probability(60, default_grid(60), 0.0), 1.0);
}

TEST(Coverage, MatchesEnumeration) {
  struct Case {
    long n, s;
    std::vector<double> grid;
  };
  const std::vector<Case> cases{{4, 4, {0.25, 0.5, 0.75, 1.0}},
                                {5, 5, {0.2, 0.6, 1.0}},
                                {5, 5, {0.4, 0.8}},
                                {3, 4, {0.5, 0.75}},
                                {4, 2, {0.5, 1.0}}};
  for (const auto& c : cases) {
    const EvaluationGrid grid(c.grid);
    for (double gamma : {0.01, 0.05, 0.1, 0.3, 0.7}) {
      EXPECT_NEAR(coverage_probability(c.n, grid, gamma), enumerated_coverage(c.n, c.s, grid, gamma), 1e-12)
          << "n=" << c.n << " s=" << c.s << " gamma=" << gamma;
    }
  }
}

TEST(Coverage, NonincreasingInGamma) {
  const auto grid = default_grid(120);
  double prev = 1.0;
  for (int j = 0; j <= 200; ++j) {
    const double c = coverage_probability(120, grid, 0.05 * j / 200.0);
    EXPECT_LE(c, prev + 1e-14);
    prev = c;
  }
}

TEST(Coverage, MatchesSerialReference) {
  for (long n : {1L, 7L, 50L, 200L}) {
    for (const auto& grid : {default_grid(n), EvaluationGrid({0.1, 0.15, 0.5, 0.93})}) {
      for (double gamma : {0.001, 0.02, 0.05, 0.3}) {
        EXPECT_NEAR(coverage_probability(n, grid, gamma), reference::coverage_single(n, grid, gamma), 1e-12);
      }
    }
  }
}

TEST(Coverage, SerialAndParallelAgree) {
  const auto grid = default_grid(400);
  for (double gamma : {0.001, 0.004, 0.02}) {
    EXPECT_NEAR(coverage_probability(400, grid, gamma, Exec::serial),
                coverage_probability(400, grid, gamma, Exec::parallel), 1e-13);
  }
}

TEST(Optimize, SinglePointMatchesBinomialScan) {
  const long n = 100;
  const EvaluationGrid half({0.5});
  const auto g = gamma_optimize(n, half, 0.05);

  // Every step of the pointwise level has its own central interval; pick the one closest to 0.95.
  std::vector<double> edges{0.0, 0.05};
  double c = 0.0;
  for (long k = 0; k <= n; ++k) {
    c += pmf(k, n, 0.5);
    for (double b : {2.0 * c, 2.0 * (1.0 - c)}) {
      if (b > 0.0 && b < 0.05) edges.push_back(b);
    }
  }
  std::sort(edges.begin(), edges.end());
  double best = -1.0;
  for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
    const double mid = 0.5 * (edges[j] + edges[j + 1]);
    double mass = 0.0;
    for (long k = quantile(mid / 2.0, n, 0.5); k <= quantile(1.0 - mid / 2.0, n, 0.5); ++k) mass += pmf(k, n, 0.5);
    if (best < 0.0 || std::fabs(mass - 0.95) < std::fabs(best - 0.95)) best = mass;
  }
  EXPECT_NEAR(g.attained_coverage, best, 1e-12);
  EXPECT_EQ(g.method, GammaMethod::optimization);
}

TEST(Optimize, AttainedCoverageNearTarget) {
  for (long n : {30L, 250L}) {
    const auto g = gamma_optimize(n, default_grid(n), 0.05);
    EXPECT_GT(g.gamma, 0.0);
    EXPECT_LE(g.gamma, 0.05);
    EXPECT_NEAR(g.attained_coverage, 0.95, 0.01);
    EXPECT_NEAR(g.attained_coverage, coverage_probability(n, default_grid(n), g.gamma), 1e-14);
  }
}

TEST(Optimize, Errors) {
  const auto grid = default_grid(10);
  for (double a : std::vector<double>{0.0, -0.1, 1.0, NAN}) {
    try {
      gamma_optimize(10, grid, a);
      FAIL() << a;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::invalid_alpha);
    }
  }
  EXPECT_THROW(coverage_probability(10, grid, 1.5), Error);
}

TEST(Simulate, DeterministicAndThreadIndependent) {
  const auto grid = default_grid(80);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = gamma_simulate(80, grid, 0.05, 2000, 42);
  omp_set_num_threads(4);
  const auto b = gamma_simulate(80, grid, 0.05, 2000, 42);
  omp_set_num_threads(saved);
  const auto c = gamma_simulate(80, grid, 0.05, 2000, 42, Exec::serial);
  EXPECT_EQ(a.gamma, b.gamma);
  EXPECT_EQ(a.gamma, c.gamma);
  EXPECT_NE(a.gamma, gamma_simulate(80, grid, 0.05, 2000, 43).gamma);
  EXPECT_EQ(a.method, GammaMethod::simulation);
  EXPECT_EQ(a.meta, 2000);
}

TEST(Simulate, SinglePointMatchesExactQuantile) {
  const long n = 100;
  const EvaluationGrid half({0.5});
  // Exact distribution of the per-replicate level 2 min(F(r), 1 - F(r - 1)) for r ~ Bin(n, 1/2).
  std::map<double, double> law;
  double below = 0.0;
  for (long r = 0; r <= n; ++r) {
    const double p = pmf(r, n, 0.5);
    law[2.0 * std::min(below + p, 1.0 - below)] += p;
    below += p;
  }
  double cum = 0.0, exact = 0.0;
  for (const auto& [v, p] : law) {
    cum += p;
    if (cum >= 0.05) {
      exact = v;
      break;
    }
  }
  const auto sim = gamma_simulate(n, half, 0.05, 100000, 7);
  const auto a = bands_from_gamma(n, half, sim.gamma);
  const auto b = bands_from_gamma(n, half, std::min(exact, 0.05));
  EXPECT_LE(std::abs(a.lower_counts[0] - b.lower_counts[0]), 1);
  EXPECT_LE(std::abs(a.upper_counts[0] - b.upper_counts[0]), 1);
}

TEST(Simulate, AttainedCoverageNearTarget) {
  const auto g = gamma_simulate(250, default_grid(250), 0.05, 10000, 1);
  EXPECT_GE(g.attained_coverage, 0.94);
  EXPECT_LE(g.attained_coverage, 0.96);
  EXPECT_LE(g.gamma, 0.05);
  EXPECT_THROW(gamma_simulate(250, default_grid(250), 0.05, 99, 1), Error);
}

TEST(Bands, Examples) {
  const auto b = bands_from_gamma(100, EvaluationGrid({0.5, 1.0}), 0.05);
  EXPECT_DOUBLE_EQ(b.lower(0), 0.40);
  EXPECT_DOUBLE_EQ(b.upper(0), 0.60);
  EXPECT_EQ(b.lower_counts[1], 100);
  EXPECT_EQ(b.upper_counts[1], 100);
  EXPECT_TRUE(std::isnan(b.gamma.attained_coverage));

  const auto pinched = bands_from_gamma(100, EvaluationGrid({0.5}), 0.999);
  EXPECT_EQ(pinched.lower_counts[0], 50);
  EXPECT_EQ(pinched.upper_counts[0], 50);
}

TEST(Bands, Nesting) {
  const auto grid = default_grid(150);
  for (double g1 : {0.001, 0.01, 0.03}) {
    const auto wide = bands_from_gamma(150, grid, g1);
    const auto narrow = bands_from_gamma(150, grid, g1 * 1.7);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      EXPECT_LE(wide.lower_counts[i], narrow.lower_counts[i]);
      EXPECT_GE(wide.upper_counts[i], narrow.upper_counts[i]);
      EXPECT_LE(narrow.lower_counts[i], narrow.upper_counts[i]);
    }
  }
}

TEST(Evaluate, BoundaryIsInside) {
  const auto grid = default_grid(60);
  const auto bands = bands_from_gamma(60, grid, 0.01);
  EXPECT_TRUE(evaluate(bands, {grid, bands.lower_counts, 60}).inside);
  EXPECT_TRUE(evaluate(bands, {grid, bands.upper_counts, 60}).inside);
  EXPECT_TRUE(inside_bands(bands, bands.lower_counts));

  auto below = bands.lower_counts;
  below[20] -= 1;
  const auto r = evaluate(bands, {grid, below, 60});
  EXPECT_FALSE(r.inside);
  ASSERT_EQ(r.exceedances.size(), 1u);
  EXPECT_EQ(r.exceedances[0].index, 20u);
  EXPECT_EQ(r.exceedances[0].side, Exceedance::Side::below_lower);
  EXPECT_FALSE(inside_bands(bands, below));

  EXPECT_THROW(evaluate(bands, {EvaluationGrid::uniform(7), std::vector<long>(7, 0), 60}), Error);
}

TEST(TestSingle, Examples) {
  const long n = 100;
  PitValues diagonal;
  for (long i = 1; i <= n; ++i) diagonal.values.push_back(static_cast<double>(i) / n);
  for (double a : {0.01, 0.05, 0.2, 0.5}) {
    SingleTestOptions o;
    o.alpha = a;
    EXPECT_TRUE(test_single(diagonal, o).inside) << a;
  }

  const auto r = test_single(PitValues{std::vector<double>(n, 0.99), std::nullopt});
  EXPECT_FALSE(r.inside);
  ASSERT_FALSE(r.exceedances.empty());
  EXPECT_LT(r.trajectory.grid[r.exceedances.front().index], 0.5);
  EXPECT_EQ(r.exceedances.front().side, Exceedance::Side::below_lower);
}

TEST(TestSingle, ResolutionRestrictsGrid) {
  PitValues pit{{0.1, 0.4, 0.4, 0.7, 1.0, 0.2, 0.9, 0.5}, 10};
  const auto r = test_single(pit);
  EXPECT_EQ(r.trajectory.grid.size(), 5u);
  EXPECT_EQ(r.bands.grid, r.trajectory.grid);
}

TEST(TestSingle, InvariantsOnRandomSamples) {
  const auto g = gamma_optimize(64, default_grid(64), 0.1);
  EXPECT_GE(g.attained_coverage, 1.0 - 2.0 * 0.1);
  EXPECT_LE(g.attained_coverage, 1.0);
  const auto b = bands_from_gamma(64, default_grid(64), g);
  for (std::size_t i = 0; i < b.grid.size(); ++i) EXPECT_LE(b.lower_counts[i], b.upper_counts[i]);
}
