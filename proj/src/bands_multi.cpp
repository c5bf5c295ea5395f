#include "ecdf_bands/bands_multi.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "band_model.hpp"
#include "ecdf_bands/error.hpp"
#include "ecdf_bands/gamma_cache.hpp"
#include "ecdf_bands/quantile.hpp"
#include "ecdf_bands/rng.hpp"

namespace ecdfb {

namespace {

void check_shape(long n, long chains) {
  if (n < 1) throw Error(ErrorCode::invalid_params, "chain length must be positive");
  if (chains < 2) throw Error(ErrorCode::invalid_params, "at least two chains are required");
}

void check_exact_supported(long chains) {
  if (chains != 2 && chains != 3) {
    throw Error(ErrorCode::unsupported_chain_count,
                "exact coverage is available for 2 or 3 chains; use simulation for " +
                    std::to_string(chains));
  }
}

double exact_coverage(long n, long chains, std::span<const long> sizes,
                      const std::vector<detail::Interval>& inside, Exec exec) {
  return chains == 2 ? detail::hyper2_recursion(n, sizes, inside, exec)
                     : detail::hyper3_recursion(n, sizes, inside, exec);
}

double two_tail(const detail::MarginalTable& t, long r) {
  const long idx = r - t.lo;
  const double below = idx < 0 ? 0.0 : t.cdf[static_cast<std::size_t>(std::min(idx, t.hi() - t.lo))];
  const double above = idx <= 0 ? 1.0 : 1.0 - t.cdf[static_cast<std::size_t>(idx - 1)];
  return 2.0 * std::min(below, above);
}

// One null replicate: L x N uniforms, pooled and sorted; counts[l][i] is the number of
// chain l draws among the first sizes[i] pooled ranks.
class ReplicateRanks {
 public:
  ReplicateRanks(long n, long chains, std::span<const long> sizes)
      : n_(n), chains_(chains), sizes_(sizes),
        pooled_(static_cast<std::size_t>(n * chains)),
        counts_(static_cast<std::size_t>(chains), std::vector<long>(sizes.size())) {}

  const std::vector<std::vector<long>>& draw(std::mt19937_64& gen) {
    for (long l = 0; l < chains_; ++l) {
      for (long j = 0; j < n_; ++j) pooled_[static_cast<std::size_t>(l * n_ + j)] = {uniform01(gen), l};
    }
    std::sort(pooled_.begin(), pooled_.end());
    std::vector<long> running(static_cast<std::size_t>(chains_), 0);
    long taken = 0;
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      for (; taken < sizes_[i]; ++taken) ++running[static_cast<std::size_t>(pooled_[static_cast<std::size_t>(taken)].second)];
      for (long l = 0; l < chains_; ++l) counts_[static_cast<std::size_t>(l)][i] = running[static_cast<std::size_t>(l)];
    }
    return counts_;
  }

 private:
  long n_;
  long chains_;
  std::span<const long> sizes_;
  std::vector<std::pair<double, long>> pooled_;
  std::vector<std::vector<long>> counts_;
};

double simulated_coverage(long n, long chains, const EvaluationGrid& grid,
                          const std::vector<detail::Interval>& inside, long m,
                          std::uint64_t seed, Exec exec) {
  const auto sizes = pooled_sizes(grid, n, chains);
  long hits = 0;
#pragma omp parallel if (exec == Exec::parallel) reduction(+ : hits)
  {
    ReplicateRanks sampler(n, chains, sizes);
#pragma omp for schedule(static)
    for (long rep = 0; rep < m; ++rep) {
      auto gen = replicate_stream(seed, static_cast<std::uint64_t>(rep));
      const auto& counts = sampler.draw(gen);
      bool ok = true;
      for (long l = 0; l < chains && ok; ++l) {
        for (std::size_t i = 0; i < sizes.size(); ++i) {
          const long r = counts[static_cast<std::size_t>(l)][i];
          if (r < inside[i].lo || r > inside[i].hi) {
            ok = false;
            break;
          }
        }
      }
      hits += ok ? 1 : 0;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(m);
}

}  // namespace

GammaResult gamma_simulate_multi(long n, long chains, const EvaluationGrid& grid, double alpha,
                                 long m, std::uint64_t seed, Exec exec) {
  detail::check_alpha(alpha);
  check_shape(n, chains);
  if (m < 100) throw Error(ErrorCode::too_few_replicates, "at least 100 replicates are required");
  const auto sizes = pooled_sizes(grid, n, chains);
  const auto tables = detail::hyper_tables(n, chains, sizes);
  std::vector<double> gammas(static_cast<std::size_t>(m));

#pragma omp parallel if (exec == Exec::parallel)
  {
    ReplicateRanks sampler(n, chains, sizes);
#pragma omp for schedule(static)
    for (long rep = 0; rep < m; ++rep) {
      auto gen = replicate_stream(seed, static_cast<std::uint64_t>(rep));
      const auto& counts = sampler.draw(gen);
      double g = 2.0;
      for (const auto& chain : counts) {
        for (std::size_t i = 0; i < sizes.size(); ++i) g = std::min(g, two_tail(tables[i], chain[i]));
      }
      assert(g > 0.0);
      gammas[static_cast<std::size_t>(rep)] = g;
    }
  }

  GammaResult out;
  out.gamma = std::min(quantile_type7(std::move(gammas), alpha), alpha);
  out.method = GammaMethod::simulation;
  out.meta = m;
  const auto inside = detail::interiors(tables, out.gamma);
  out.attained_coverage = chains <= 3
                              ? exact_coverage(n, chains, sizes, inside, exec)
                              : simulated_coverage(n, chains, grid, inside, m, seed + 1, exec);
  return out;
}

double coverage_probability_multi(long n, long chains, const EvaluationGrid& grid, double gamma,
                                  Exec exec) {
  detail::check_gamma(gamma);
  check_shape(n, chains);
  check_exact_supported(chains);
  if (gamma == 0.0) return 1.0;
  const auto sizes = pooled_sizes(grid, n, chains);
  const auto tables = detail::hyper_tables(n, chains, sizes);
  return exact_coverage(n, chains, sizes, detail::interiors(tables, gamma), exec);
}

GammaResult gamma_optimize_multi(long n, long chains, const EvaluationGrid& grid, double alpha,
                                 const OptimizeOptions& options) {
  detail::check_alpha(alpha);
  check_shape(n, chains);
  check_exact_supported(chains);
  const auto sizes = pooled_sizes(grid, n, chains);
  const auto tables = detail::hyper_tables(n, chains, sizes);
  return detail::optimize_gamma(tables, alpha, options,
                                [&](const std::vector<detail::Interval>& inside) {
                                  return exact_coverage(n, chains, sizes, inside, options.exec);
                                });
}

MultiBands bands_from_gamma_multi(long n, long chains, const EvaluationGrid& grid,
                                  const GammaResult& gamma) {
  detail::check_gamma(gamma.gamma);
  check_shape(n, chains);
  auto sizes = pooled_sizes(grid, n, chains);
  const auto inside = detail::interiors(detail::hyper_tables(n, chains, sizes), gamma.gamma);
  MultiBands bands{grid, {}, {}, gamma, n, chains, std::move(sizes)};
  for (const auto& iv : inside) {
    bands.lower_counts.push_back(iv.lo);
    bands.upper_counts.push_back(iv.hi);
  }
  return bands;
}

MultiBands bands_from_gamma_multi(long n, long chains, const EvaluationGrid& grid, double gamma) {
  GammaResult g;
  g.gamma = gamma;
  g.attained_coverage = std::nan("");
  return bands_from_gamma_multi(n, chains, grid, g);
}

std::vector<std::vector<long>> rank_counts(const std::vector<std::vector<long>>& ranks,
                                           std::span<const long> sizes) {
  std::vector<std::vector<long>> out;
  out.reserve(ranks.size());
  for (const auto& chain : ranks) {
    std::vector<long> sorted(chain);
    std::sort(sorted.begin(), sorted.end());
    std::vector<long> counts(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      counts[i] = std::upper_bound(sorted.begin(), sorted.end(), sizes[i]) - sorted.begin();
    }
    out.push_back(std::move(counts));
  }
  return out;
}

bool inside_bands_multi(const MultiBands& bands,
                        const std::vector<std::vector<long>>& counts) noexcept {
  return std::all_of(counts.begin(), counts.end(),
                     [&](const std::vector<long>& c) { return inside_bands(bands, c); });
}

MultiBands multi_bands(long n, long chains, const EvaluationGrid& grid, double alpha,
                       BandMethod method, long replicates, std::uint64_t seed,
                       const GammaGrid* cache, long k_max) {
  check_shape(n, chains);
  GammaResult gamma;
  switch (method) {
    case BandMethod::automatic:
      if (auto cached = cached_gamma(cache, n, chains, alpha, grid, k_max)) {
        gamma = *cached;
        if (chains <= 3) gamma.attained_coverage = coverage_probability_multi(n, chains, grid, gamma.gamma);
        break;
      }
      gamma = chains <= 3 ? gamma_optimize_multi(n, chains, grid, alpha)
                          : gamma_simulate_multi(n, chains, grid, alpha, replicates, seed);
      break;
    case BandMethod::optimize:
      gamma = gamma_optimize_multi(n, chains, grid, alpha);
      break;
    case BandMethod::simulate:
      gamma = gamma_simulate_multi(n, chains, grid, alpha, replicates, seed);
      break;
  }
  return bands_from_gamma_multi(n, chains, grid, gamma);
}

MultiTestReport test_multi(const ChainSet& chains, const MultiTestOptions& options) {
  const long n = static_cast<long>(chains.length());
  const long count = static_cast<long>(chains.chain_count());
  check_shape(n, count);
  const EvaluationGrid grid =
      options.grid ? *options.grid : default_grid(n, std::nullopt, options.k_max);
  MultiTestReport report{true,
                         multi_bands(n, count, grid, options.alpha, options.method,
                                     options.replicates, options.seed, options.cache, options.k_max),
                         {}};
  const auto counts = rank_counts(joint_ranks(chains, options.tie), report.bands.pooled_sizes);
  for (const auto& c : counts) {
    report.chains.push_back(evaluate(report.bands, EcdfTrajectory{grid, c, n}));
    report.inside = report.inside && report.chains.back().inside;
  }
  return report;
}

}  // namespace ecdfb
