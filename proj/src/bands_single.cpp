#include "ecdf_bands/bands_single.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "band_model.hpp"
#include "ecdf_bands/error.hpp"
#include "ecdf_bands/gamma_cache.hpp"
#include "ecdf_bands/quantile.hpp"
#include "ecdf_bands/rng.hpp"

namespace ecdfb {

const char* to_string(GammaMethod method) noexcept {
  switch (method) {
    case GammaMethod::simulation:
      return "simulation";
    case GammaMethod::optimization:
      return "optimization";
    case GammaMethod::interpolated:
      return "interpolated";
  }
  return "unknown";
}

namespace {

void check_sample_size(long n) {
  if (n < 1) throw Error(ErrorCode::invalid_params, "sample size must be positive");
}

void check_replicates(long m) {
  if (m < 100) throw Error(ErrorCode::too_few_replicates, "at least 100 replicates are required");
}

// Counts of sorted uniforms at or below each grid point.
void grid_counts(const std::vector<double>& sorted, const EvaluationGrid& grid,
                 std::vector<long>& counts) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    while (j < sorted.size() && sorted[j] <= grid[i]) ++j;
    counts[i] = static_cast<long>(j);
  }
}

// Twice the smaller tail probability of count r under its marginal.
double two_tail(const detail::MarginalTable& t, long r) {
  const long idx = r - t.lo;
  const double below = idx < 0 ? 0.0 : t.cdf[static_cast<std::size_t>(std::min(idx, t.hi() - t.lo))];
  const double above = idx <= 0 ? 1.0 : 1.0 - t.cdf[static_cast<std::size_t>(idx - 1)];
  return 2.0 * std::min(below, above);
}

}  // namespace

GammaResult gamma_simulate(long n, const EvaluationGrid& grid, double alpha, long m,
                           std::uint64_t seed, Exec exec) {
  detail::check_alpha(alpha);
  check_sample_size(n);
  check_replicates(m);
  const auto tables = detail::binomial_tables(n, grid);
  std::vector<double> gammas(static_cast<std::size_t>(m));

#pragma omp parallel if (exec == Exec::parallel)
  {
    std::vector<double> u(static_cast<std::size_t>(n));
    std::vector<long> counts(grid.size());
#pragma omp for schedule(static)
    for (long rep = 0; rep < m; ++rep) {
      auto gen = replicate_stream(seed, static_cast<std::uint64_t>(rep));
      for (auto& v : u) v = uniform01(gen);
      std::sort(u.begin(), u.end());
      grid_counts(u, grid, counts);
      double g = 2.0;
      for (std::size_t i = 0; i < grid.size(); ++i) g = std::min(g, two_tail(tables[i], counts[i]));
      assert(g > 0.0);
      gammas[static_cast<std::size_t>(rep)] = g;
    }
  }

  GammaResult out;
  out.gamma = std::min(quantile_type7(std::move(gammas), alpha), alpha);
  out.method = GammaMethod::simulation;
  out.meta = m;
  out.attained_coverage =
      detail::binomial_recursion(n, grid, detail::interiors(tables, out.gamma), exec);
  return out;
}

double coverage_probability(long n, const EvaluationGrid& grid, double gamma, Exec exec) {
  detail::check_gamma(gamma);
  check_sample_size(n);
  if (gamma == 0.0) return 1.0;
  const auto tables = detail::binomial_tables(n, grid);
  return detail::binomial_recursion(n, grid, detail::interiors(tables, gamma), exec);
}

GammaResult gamma_optimize(long n, const EvaluationGrid& grid, double alpha,
                           const OptimizeOptions& options) {
  detail::check_alpha(alpha);
  check_sample_size(n);
  const auto tables = detail::binomial_tables(n, grid);
  return detail::optimize_gamma(tables, alpha, options,
                                [&](const std::vector<detail::Interval>& inside) {
                                  return detail::binomial_recursion(n, grid, inside, options.exec);
                                });
}

ConfidenceBands bands_from_gamma(long n, const EvaluationGrid& grid, const GammaResult& gamma) {
  detail::check_gamma(gamma.gamma);
  check_sample_size(n);
  const auto inside = detail::interiors(detail::binomial_tables(n, grid), gamma.gamma);
  ConfidenceBands bands{grid, {}, {}, gamma, n, 1, {}};
  for (const auto& iv : inside) {
    bands.lower_counts.push_back(iv.lo);
    bands.upper_counts.push_back(iv.hi);
  }
  return bands;
}

ConfidenceBands bands_from_gamma(long n, const EvaluationGrid& grid, double gamma) {
  GammaResult g;
  g.gamma = gamma;
  g.attained_coverage = std::nan("");
  return bands_from_gamma(n, grid, g);
}

TestReport evaluate(const ConfidenceBands& bands, EcdfTrajectory trajectory) {
  if (!(trajectory.grid == bands.grid)) {
    throw Error(ErrorCode::grid_mismatch, "trajectory and bands use different grids");
  }
  if (trajectory.sample_size != bands.n) {
    throw Error(ErrorCode::invalid_params, "trajectory and bands use different sample sizes");
  }
  TestReport report{true, {}, bands, std::move(trajectory)};
  const auto& counts = report.trajectory.counts;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < bands.lower_counts[i]) {
      report.exceedances.push_back({i, report.trajectory.value(i), bands.lower(i),
                                    Exceedance::Side::below_lower});
    } else if (counts[i] > bands.upper_counts[i]) {
      report.exceedances.push_back({i, report.trajectory.value(i), bands.upper(i),
                                    Exceedance::Side::above_upper});
    }
  }
  report.inside = report.exceedances.empty();
  return report;
}

bool inside_bands(const ConfidenceBands& bands, std::span<const long> counts) noexcept {
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < bands.lower_counts[i] || counts[i] > bands.upper_counts[i]) return false;
  }
  return true;
}

TestReport test_single(const PitValues& pit, const SingleTestOptions& options) {
  const long n = static_cast<long>(pit.values.size());
  check_sample_size(n);
  const EvaluationGrid grid =
      options.grid ? *options.grid : default_grid(n, pit.resolution, options.k_max);
  auto trajectory = ecdf_eval(pit.values, grid);

  GammaResult gamma;
  switch (options.method) {
    case BandMethod::automatic:
      if (auto cached = cached_gamma(options.cache, n, 1, options.alpha, grid, options.k_max)) {
        gamma = *cached;
        gamma.attained_coverage = coverage_probability(n, grid, gamma.gamma);
        break;
      }
      gamma = gamma_optimize(n, grid, options.alpha);
      break;
    case BandMethod::optimize:
      gamma = gamma_optimize(n, grid, options.alpha);
      break;
    case BandMethod::simulate:
      gamma = gamma_simulate(n, grid, options.alpha, options.replicates, options.seed);
      break;
  }
  return evaluate(bands_from_gamma(n, grid, gamma), std::move(trajectory));
}

}  // namespace ecdfb
