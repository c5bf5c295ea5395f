#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecdf_bands/bands_single.hpp"

namespace ecdfb {

struct GammaEntry {
  long n = 0;
  long l = 1;
  long k = 0;
  double alpha = 0.05;
  double gamma = 0.0;
  double coverage = 0.0;
  GammaMethod method = GammaMethod::optimization;

  friend bool operator==(const GammaEntry&, const GammaEntry&) = default;
};

/// Precomputed γ values keyed by (L, alpha, N, K), kept sorted by (L, alpha, N).
class GammaGrid {
 public:
  GammaGrid() = default;
  explicit GammaGrid(std::vector<GammaEntry> entries);

  const std::vector<GammaEntry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  /// Inserts or replaces the entry with the same key.
  void insert(const GammaEntry& entry);

  const GammaEntry* find(long n, long l, long k, double alpha) const noexcept;

  /// Entries for (l, alpha) built with K = min(N, k_max), sorted by N.
  std::vector<GammaEntry> slice(long l, double alpha, long k_max) const;

  std::string to_json() const;
  static GammaGrid from_json(const std::string& text);
  void save(const std::string& path) const;
  static GammaGrid load(const std::string& path);

 private:
  std::vector<GammaEntry> entries_;
};

struct GridBuildOptions {
  long k_max = 100;
  long replicates = 10000;
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;
};

/// One entry per (N, L, alpha) on the grid i/K with K = min(N, k_max): optimisation for
/// L <= 3, simulation otherwise. Every key uses its own seed stream, so the file is
/// reproducible regardless of scheduling.
GammaGrid build_grid(const std::vector<long>& ns, const std::vector<long>& ls,
                     const std::vector<double>& alphas, const GridBuildOptions& options = {});

/// Log-log interpolation of γ in N within the (l, alpha, k_max) slice. Stored keys return
/// the stored entry. attained_coverage is left at 0 (not evaluated).
GammaResult interpolate(const GammaGrid& grid, long n, long l, double alpha, long k_max = 100);

/// Interpolated γ when the cache covers the query and `grid` is the slice's grid i/min(N, k_max).
std::optional<GammaResult> cached_gamma(const GammaGrid* cache, long n, long l, double alpha,
                                        const EvaluationGrid& grid, long k_max);

}  // namespace ecdfb
