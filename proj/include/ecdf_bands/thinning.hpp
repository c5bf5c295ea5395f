#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ecdf_bands/transform.hpp"

namespace ecdfb {

/// Stationary AR(1) chains with unit marginal variance: x_t = phi x_{t-1} + sqrt(1 - phi^2) e_t.
/// Chain l uses its own stream derived from (seed, l).
ChainSet ar1_simulate(double phi, long n, long chains, std::uint64_t seed);

struct EssReport {
  double ess_mean = 0.0;
  double ess_bulk = 0.0;
  double ess_tail = 0.0;
  /// Indicator ESS at the quantiles 0.05, 0.10, ..., 0.95.
  std::array<double, 19> ess_quantiles{};
};

/// Split-chain ESS with Geyer's initial positive and monotone sequence truncation.
double ess_basic(const std::vector<std::vector<double>>& chains);

EssReport ess_report(const ChainSet& chains);

enum class ThinningStrategy { mean_ess, quantile_19, bulk_tail_min, tail_ess };

const char* to_string(ThinningStrategy s) noexcept;
ThinningStrategy strategy_from_string(const std::string& s);

struct ThinningPlan {
  ThinningStrategy strategy = ThinningStrategy::bulk_tail_min;
  double ess = 0.0;
  long factor = 1;
  long length = 0;
};

/// T = ceil(n_total / ESS) for the strategy's ESS; T = 1 whenever n_total / ESS <= 1.25,
/// so near-independent chains are never thinned because of estimator noise.
ThinningPlan thinning_factor(const EssReport& report, long n_total, long chain_length,
                             ThinningStrategy strategy);

/// Keeps draws 0, T, 2T, ... of every chain.
ChainSet thin(const ChainSet& chains, long t);

/// Sample autocorrelation of one sequence at the given lag.
double autocorrelation(std::span<const double> x, long lag);

}  // namespace ecdfb
