#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ecdf_bands/bands_single.hpp"
#include "ecdf_bands/transform.hpp"

namespace ecdfb {

/// Bands for L jointly ranked chains: raw rank bounds at s_i, shared by every chain.
using MultiBands = ConfidenceBands;

/// Dimension of the recursion state once the redundant last chain is dropped.
constexpr int multi_state_dimension(int chains) noexcept { return chains - 1; }

GammaResult gamma_simulate_multi(long n, long chains, const EvaluationGrid& grid, double alpha,
                                 long m = 10000, std::uint64_t seed = 0,
                                 Exec exec = Exec::parallel);

/// Exact coverage by the multivariate hypergeometric recursion; L must be 2 or 3.
double coverage_probability_multi(long n, long chains, const EvaluationGrid& grid, double gamma,
                                  Exec exec = Exec::serial);

GammaResult gamma_optimize_multi(long n, long chains, const EvaluationGrid& grid, double alpha,
                                 const OptimizeOptions& options = {});

MultiBands bands_from_gamma_multi(long n, long chains, const EvaluationGrid& grid,
                                  const GammaResult& gamma);
MultiBands bands_from_gamma_multi(long n, long chains, const EvaluationGrid& grid, double gamma);

/// Per-chain rank counts r_il at each s_i, from integer joint ranks.
std::vector<std::vector<long>> rank_counts(const std::vector<std::vector<long>>& ranks,
                                           std::span<const long> sizes);

bool inside_bands_multi(const MultiBands& bands,
                        const std::vector<std::vector<long>>& counts) noexcept;

struct MultiTestReport {
  bool inside = true;
  MultiBands bands;
  std::vector<TestReport> chains;
};

struct MultiTestOptions {
  double alpha = 0.05;
  BandMethod method = BandMethod::automatic;
  std::optional<EvaluationGrid> grid;
  long k_max = 100;
  TieBreak tie;
  long replicates = 10000;
  std::uint64_t seed = 0;
  const GammaGrid* cache = nullptr;
};

MultiTestReport test_multi(const ChainSet& chains, const MultiTestOptions& options = {});

/// Bands for (N, L) by the requested method (automatic: optimise for L <= 3, else simulate).
MultiBands multi_bands(long n, long chains, const EvaluationGrid& grid, double alpha,
                       BandMethod method, long replicates, std::uint64_t seed,
                       const GammaGrid* cache = nullptr, long k_max = 100);

}  // namespace ecdfb
