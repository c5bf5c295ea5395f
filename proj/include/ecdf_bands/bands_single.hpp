#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ecdf_bands/transform.hpp"

namespace ecdfb {

enum class GammaMethod { simulation, optimization, interpolated };

const char* to_string(GammaMethod method) noexcept;

/// Adjusted pointwise level γ achieving (approximately) 1 - α simultaneous coverage.
struct GammaResult {
  double gamma = 0.0;
  double attained_coverage = 0.0;
  GammaMethod method = GammaMethod::optimization;
  /// Replicates M for simulation, coverage evaluations for optimisation.
  long meta = 0;
};

/// Simultaneous bands in count units. For L chains the bounds are rank counts at the
/// pooled sizes s_i; the scaled accessors divide by N for ECDF-axis plotting.
struct ConfidenceBands {
  EvaluationGrid grid;
  std::vector<long> lower_counts;
  std::vector<long> upper_counts;
  GammaResult gamma;
  long n = 0;
  long chains = 1;
  /// s_i = floor(z_i N L); empty for a single sample.
  std::vector<long> pooled_sizes;

  double lower(std::size_t i) const noexcept {
    return static_cast<double>(lower_counts[i]) / static_cast<double>(n);
  }
  double upper(std::size_t i) const noexcept {
    return static_cast<double>(upper_counts[i]) / static_cast<double>(n);
  }
};

struct Exceedance {
  enum class Side { below_lower, above_upper };
  std::size_t index = 0;
  double observed = 0.0;
  double bound = 0.0;
  Side side = Side::below_lower;
};

struct TestReport {
  bool inside = true;
  std::vector<Exceedance> exceedances;
  ConfidenceBands bands;
  EcdfTrajectory trajectory;
};

enum class Exec { serial, parallel };

struct OptimizeOptions {
  double tol = 1e-6;
  int max_iter = 200;
  /// Parallelism inside each coverage evaluation.
  Exec exec = Exec::serial;
};

/// Simulation method: per replicate the largest γ keeping its ECDF inside, then the
/// empirical α-quantile over M replicates. Replicates run in parallel under Exec::parallel
/// with per-replicate streams, so the result is independent of the thread count.
GammaResult gamma_simulate(long n, const EvaluationGrid& grid, double alpha, long m = 10000,
                           std::uint64_t seed = 0, Exec exec = Exec::parallel);

/// Exact Pr(all r_i inside I_i(γ)) by the forward binomial recursion.
double coverage_probability(long n, const EvaluationGrid& grid, double gamma,
                            Exec exec = Exec::serial);

GammaResult gamma_optimize(long n, const EvaluationGrid& grid, double alpha,
                           const OptimizeOptions& options = {});

ConfidenceBands bands_from_gamma(long n, const EvaluationGrid& grid, const GammaResult& gamma);
ConfidenceBands bands_from_gamma(long n, const EvaluationGrid& grid, double gamma);

/// Compare a trajectory with bands; points on a bound count as inside.
TestReport evaluate(const ConfidenceBands& bands, EcdfTrajectory trajectory);

/// Fast check on raw counts, for calibration loops.
bool inside_bands(const ConfidenceBands& bands, std::span<const long> counts) noexcept;

enum class BandMethod { automatic, simulate, optimize };

class GammaGrid;

struct SingleTestOptions {
  double alpha = 0.05;
  BandMethod method = BandMethod::optimize;
  std::optional<EvaluationGrid> grid;
  long k_max = 100;
  long replicates = 10000;
  std::uint64_t seed = 0;
  /// Consulted first when method is automatic.
  const GammaGrid* cache = nullptr;
};

TestReport test_single(const PitValues& pit, const SingleTestOptions& options = {});

}  // namespace ecdfb
