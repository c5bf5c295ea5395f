#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ecdfb {

/// Strictly increasing evaluation points z_1 < ... < z_K in (0, 1], with an implicit z_0 = 0.
class EvaluationGrid {
 public:
  explicit EvaluationGrid(std::vector<double> points);

  /// Points i/K for i = 1..K.
  static EvaluationGrid uniform(long k);

  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const noexcept { return points_[i]; }
  std::span<const double> points() const noexcept { return points_; }
  bool ends_at_one() const noexcept { return points_.back() == 1.0; }

  friend bool operator==(const EvaluationGrid&, const EvaluationGrid&) = default;

 private:
  std::vector<double> points_;
};

/// PIT values in [0, 1]. `resolution` is S for empirical PIT on {0, 1/S, ..., 1};
/// empty for continuous PIT.
struct PitValues {
  std::vector<double> values;
  std::optional<long> resolution;
};

/// L equal-length chains of finite draws.
class ChainSet {
 public:
  ChainSet() = default;
  explicit ChainSet(std::vector<std::vector<double>> chains);

  std::size_t chain_count() const noexcept { return chains_.size(); }
  std::size_t length() const noexcept { return chains_.empty() ? 0 : chains_.front().size(); }
  std::size_t total() const noexcept { return chain_count() * length(); }
  const std::vector<double>& operator[](std::size_t l) const noexcept { return chains_[l]; }
  const std::vector<std::vector<double>>& chains() const noexcept { return chains_; }

 private:
  std::vector<std::vector<double>> chains_;
};

/// Scaled ECDF r_i = N F(z_i) at the grid points.
struct EcdfTrajectory {
  EvaluationGrid grid;
  std::vector<long> counts;
  long sample_size = 0;

  double value(std::size_t i) const noexcept {
    return static_cast<double>(counts[i]) / static_cast<double>(sample_size);
  }
};

/// u_i = (1/S) #{j : x^i_j <= y_i}.
PitValues empirical_pit(std::span<const double> draws,
                        const std::vector<std::vector<double>>& comparison);

/// (1/N) #{j : y_j <= y_i}; tied values share the maximal count.
std::vector<double> fractional_ranks(std::span<const double> values);

enum class TiePolicy { deterministic, random };

struct TieBreak {
  TiePolicy policy = TiePolicy::deterministic;
  std::uint64_t seed = 0;
};

/// Ranks 1..LN over the pooled draws, returned per chain. Ties are broken by
/// (value, chain, position) or uniformly at random from `tie.seed`.
std::vector<std::vector<long>> joint_ranks(const ChainSet& chains, TieBreak tie = {});

/// joint_ranks divided by L*N.
std::vector<std::vector<double>> joint_fractional_ranks(const ChainSet& chains, TieBreak tie = {});

EcdfTrajectory ecdf_eval(std::span<const double> values, const EvaluationGrid& grid);

/// K = min(N, S, k_max) points i/K; for finite S, K is reduced to the largest divisor of S.
EvaluationGrid default_grid(long n, std::optional<long> resolution = std::nullopt, long k_max = 100);

/// Grid at the distinct ordered fractional ranks of `values`.
EvaluationGrid fractional_rank_grid(std::span<const double> values);

/// s_i = floor(z_i N L), the pooled rank count at each grid point.
std::vector<long> pooled_sizes(const EvaluationGrid& grid, long n, long chains);

}  // namespace ecdfb
