#include "ecdf_bands/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ecdf_bands/error.hpp"
#include "ecdf_bands/rng.hpp"

namespace ecdfb {

EvaluationGrid::EvaluationGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw Error(ErrorCode::invalid_params, "grid needs at least one point");
  double prev = 0.0;
  for (double z : points_) {
    if (!(z > prev) || z > 1.0) {
      throw Error(ErrorCode::invalid_params,
                  "grid points must be strictly increasing within (0, 1]");
    }
    prev = z;
  }
}

EvaluationGrid EvaluationGrid::uniform(long k) {
  if (k < 1) throw Error(ErrorCode::invalid_params, "grid size must be positive");
  std::vector<double> pts(static_cast<std::size_t>(k));
  for (long i = 1; i <= k; ++i) {
    pts[static_cast<std::size_t>(i - 1)] = static_cast<double>(i) / static_cast<double>(k);
  }
  return EvaluationGrid(std::move(pts));
}

ChainSet::ChainSet(std::vector<std::vector<double>> chains) : chains_(std::move(chains)) {
  if (chains_.empty() || chains_.front().empty()) {
    throw Error(ErrorCode::invalid_params, "chain set needs at least one nonempty chain");
  }
  const std::size_t n = chains_.front().size();
  for (const auto& c : chains_) {
    if (c.size() != n) throw Error(ErrorCode::unequal_chain_lengths, "chains differ in length");
    for (double v : c) {
      if (!std::isfinite(v)) throw Error(ErrorCode::invalid_params, "chain values must be finite");
    }
  }
}

PitValues empirical_pit(std::span<const double> draws,
                        const std::vector<std::vector<double>>& comparison) {
  if (comparison.size() != draws.size()) {
    throw Error(ErrorCode::invalid_params, "one comparison sample is needed per draw");
  }
  PitValues out;
  out.values.reserve(draws.size());
  bool common_size = true;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const auto& x = comparison[i];
    if (x.empty()) throw Error(ErrorCode::empty_comparison, "comparison sample " + std::to_string(i));
    common_size = common_size && x.size() == comparison.front().size();
    const auto below = std::count_if(x.begin(), x.end(), [&](double v) { return v <= draws[i]; });
    out.values.push_back(static_cast<double>(below) / static_cast<double>(x.size()));
  }
  // Mixed comparison sizes have no common discrete grid.
  if (common_size && !comparison.empty()) out.resolution = static_cast<long>(comparison.front().size());
  return out;
}

std::vector<double> fractional_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> out(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = static_cast<double>(j + 1) / static_cast<double>(n);
    for (std::size_t t = i; t <= j; ++t) out[order[t]] = r;
    i = j + 1;
  }
  return out;
}

std::vector<std::vector<long>> joint_ranks(const ChainSet& chains, TieBreak tie) {
  const std::size_t L = chains.chain_count();
  const std::size_t n = chains.length();
  if (L < 2) throw Error(ErrorCode::invalid_params, "joint ranks need at least two chains");
  struct Item {
    double value;
    std::uint64_t key;
    std::uint32_t chain;
    std::uint32_t pos;
  };
  std::vector<Item> pooled;
  pooled.reserve(L * n);
  std::mt19937_64 gen(splitmix64(tie.seed));
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint64_t key = tie.policy == TiePolicy::random ? gen() : 0;
      pooled.push_back({chains[l][j], key, static_cast<std::uint32_t>(l),
                        static_cast<std::uint32_t>(j)});
    }
  }
  std::sort(pooled.begin(), pooled.end(), [](const Item& a, const Item& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.key != b.key) return a.key < b.key;
    if (a.chain != b.chain) return a.chain < b.chain;
    return a.pos < b.pos;
  });
  std::vector<std::vector<long>> ranks(L, std::vector<long>(n));
  for (std::size_t r = 0; r < pooled.size(); ++r) {
    ranks[pooled[r].chain][pooled[r].pos] = static_cast<long>(r + 1);
  }
  return ranks;
}

std::vector<std::vector<double>> joint_fractional_ranks(const ChainSet& chains, TieBreak tie) {
  const auto ranks = joint_ranks(chains, tie);
  const double total = static_cast<double>(chains.total());
  std::vector<std::vector<double>> out;
  out.reserve(ranks.size());
  for (const auto& chain : ranks) {
    std::vector<double> scaled(chain.size());
    std::transform(chain.begin(), chain.end(), scaled.begin(),
                   [&](long r) { return static_cast<double>(r) / total; });
    out.push_back(std::move(scaled));
  }
  return out;
}

EcdfTrajectory ecdf_eval(std::span<const double> values, const EvaluationGrid& grid) {
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::invalid_params, "ECDF values must lie in [0,1]");
  }
  std::sort(sorted.begin(), sorted.end());
  EcdfTrajectory out{grid, std::vector<long>(grid.size()), static_cast<long>(sorted.size())};
  std::size_t j = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    while (j < sorted.size() && sorted[j] <= grid[i]) ++j;
    out.counts[i] = static_cast<long>(j);
  }
  return out;
}

EvaluationGrid default_grid(long n, std::optional<long> resolution, long k_max) {
  if (n < 1) throw Error(ErrorCode::invalid_params, "sample size must be positive");
  if (k_max < 1) throw Error(ErrorCode::invalid_params, "k_max must be positive");
  long k = std::min(n, k_max);
  if (resolution) {
    const long s = *resolution;
    if (s < 1) throw Error(ErrorCode::invalid_params, "resolution must be positive");
    k = std::min(k, s);
    while (s % k != 0) --k;
  }
  return EvaluationGrid::uniform(k);
}

EvaluationGrid fractional_rank_grid(std::span<const double> values) {
  auto ranks = fractional_ranks(values);
  std::sort(ranks.begin(), ranks.end());
  ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());
  return EvaluationGrid(std::move(ranks));
}

std::vector<long> pooled_sizes(const EvaluationGrid& grid, long n, long chains) {
  std::vector<long> sizes(grid.size());
  const double total = static_cast<double>(n) * static_cast<double>(chains);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sizes[i] = static_cast<long>(std::floor(grid[i] * total + 1e-9));
  }
  return sizes;
}

}  // namespace ecdfb
